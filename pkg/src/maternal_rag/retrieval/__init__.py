from .bm25 import SparseIndex, bm25_retrieve, build_bm25_index
from .dense import DenseIndex, build_dense_index, dense_retrieve
from .fusion import deduplicate, rrf_fuse
from .hybrid import Indexes, RetrievalConfig, RetrievalResult, retrieve_and_rerank
from .rerank import rerank
from .scored import Scored, ScoredList, is_canonical, is_descending
from .systems import system_rankings

__all__ = [
    "DenseIndex", "Indexes", "RetrievalConfig", "RetrievalResult", "Scored", "ScoredList", "SparseIndex",
    "bm25_retrieve", "build_bm25_index", "build_dense_index", "deduplicate", "dense_retrieve",
    "is_canonical", "is_descending", "rerank", "retrieve_and_rerank", "rrf_fuse", "system_rankings",
]

from __future__ import annotations

from ..errors import ProviderError
from .scored import Scored, ScoredList


def rerank(scorer, query_en: str, candidates: ScoredList, k_rerank: int, texts) -> ScoredList:
    """Rescore candidates and keep the best ``k_rerank``.

    ``texts`` maps chunk id to passage text. Ties keep the incoming order,
    so a constant scorer is a no-op apart from truncation.
    """
    if len(candidates) == 0:
        raise ValueError("rerank needs at least one candidate")
    rescored = []
    for pos, entry in enumerate(candidates):
        try:
            score = float(scorer.score(query_en, texts[entry.chunk_id]))
        except ProviderError:
            raise
        except Exception as exc:
            raise ProviderError(f"reranker failed on {entry.chunk_id}: {exc}") from exc
        rescored.append((pos, Scored(entry.chunk_id, score)))
    rescored.sort(key=lambda item: (-item[1].score, item[0]))
    return ScoredList(tuple(e for _, e in rescored[:k_rerank]))

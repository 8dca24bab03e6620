"""HTTP clients: the completion endpoint and a best-effort Wikipedia harvester.

The completion client targets any OpenAI-style text endpoint; the field that
holds the generated text is addressed with a JSON pointer so differently
shaped servers can be used without code changes.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Iterator

import requests

from .dataset import DocumentRecord
from .errors import DataError, NetworkError
from .graph import ConceptGraph, Edge

logger = logging.getLogger(__name__)

DEFAULT_TEMPERATURE = 0.1
DEFAULT_TOP_P = 0.9


def resolve_json_pointer(doc, pointer: str):
    """Minimal RFC 6901 lookup ("/choices/0/text"); list indices are numeric."""
    if pointer in ("", "/"):
        return doc
    cur = doc
    for token in pointer.lstrip("/").split("/"):
        token = token.replace("~1", "/").replace("~0", "~")
        if isinstance(cur, list):
            try:
                cur = cur[int(token)]
            except (ValueError, IndexError) as exc:
                raise DataError(f"JSON pointer {pointer!r}: bad list index {token!r}") from exc
        elif isinstance(cur, dict):
            if token not in cur:
                raise DataError(f"JSON pointer {pointer!r}: missing key {token!r}")
            cur = cur[token]
        else:
            raise DataError(f"JSON pointer {pointer!r}: cannot descend into {type(cur).__name__}")
    return cur


@dataclass
class CompletionClient:
    """POSTs prompts to a completion endpoint with bounded retries."""

    url: str
    temperature: float = DEFAULT_TEMPERATURE
    top_p: float = DEFAULT_TOP_P
    max_tokens: int = 512
    response_pointer: str = "/choices/0/text"
    timeout: float = 120.0
    retries: int = 3
    backoff: float = 1.0
    session: requests.Session = field(default_factory=requests.Session, repr=False)

    def complete(self, prompt: str) -> str:
        payload = {
            "prompt": prompt,
            "temperature": self.temperature,
            "top_p": self.top_p,
            "max_tokens": self.max_tokens,
        }
        last: Exception | None = None
        for attempt in range(self.retries):
            if attempt:
                time.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                resp = self.session.post(self.url, json=payload, timeout=self.timeout)
                resp.raise_for_status()
                return str(resolve_json_pointer(resp.json(), self.response_pointer))
            except (requests.RequestException, ValueError) as exc:
                last = exc
                logger.warning("completion request failed (attempt %d): %s", attempt + 1, exc)
        raise NetworkError(f"completion endpoint {self.url} failed after {self.retries} tries: {last}")

    __call__ = complete


_WIKI_API = "https://en.wikipedia.org/w/api.php"


def _api_get(session: requests.Session, api_url: str, params: dict, timeout: float) -> dict:
    params = dict(params, format="json", formatversion="2")
    for attempt in range(3):
        if attempt:
            time.sleep(2 ** (attempt - 1))
        try:
            resp = session.get(api_url, params=params, timeout=timeout)
            resp.raise_for_status()
            return resp.json()
        except (requests.RequestException, ValueError) as exc:
            last = exc
            logger.warning("wiki API request failed (attempt %d): %s", attempt + 1, exc)
    raise NetworkError(f"wiki API unreachable: {last}")


def _category_members(
    session: requests.Session, api_url: str, category: str, member_type: str, limit: int, timeout: float
) -> Iterator[dict]:
    fetched = 0
    cont: dict = {}
    while fetched < limit:
        data = _api_get(
            session,
            api_url,
            {
                "action": "query",
                "list": "categorymembers",
                "cmtitle": f"Category:{category}",
                "cmtype": member_type,
                "cmlimit": min(500, limit - fetched),
                **cont,
            },
            timeout,
        )
        members = data.get("query", {}).get("categorymembers", [])
        for m in members:
            yield m
            fetched += 1
            if fetched >= limit:
                return
        cont = data.get("continue") or {}
        if not cont:
            return


def harvest_wikipedia(
    root: str = "Main topic classifications",
    depth: int = 3,
    pages_per_category: int = 5000,
    api_url: str = _WIKI_API,
    sleep: float = 0.05,
    timeout: float = 30.0,
    session: requests.Session | None = None,
) -> tuple[list[DocumentRecord], ConceptGraph]:
    """BFS the category tree and pull page titles + lead-section summaries.

    Best-effort network client: it is not exercised by the test suite and it
    deliberately stays polite (serial requests, configurable sleep). Returns
    the corpus and the traversed category graph.
    """
    session = session or requests.Session()
    session.headers.setdefault("User-Agent", "ontokit-harvest/0.1")
    edges: set[Edge] = set()
    seen_cats = {root}
    frontier = [root]
    page_cats: dict[int, set[str]] = {}
    page_titles: dict[int, str] = {}
    for _ in range(depth):
        nxt: list[str] = []
        for cat in frontier:
            for m in _category_members(session, api_url, cat, "subcat", 500, timeout):
                sub = m["title"].split(":", 1)[-1]
                edges.add((cat, sub))
                if sub not in seen_cats:
                    seen_cats.add(sub)
                    nxt.append(sub)
            time.sleep(sleep)
        frontier = nxt
    for cat in sorted(seen_cats):
        for m in _category_members(session, api_url, cat, "page", pages_per_category, timeout):
            pid = int(m["pageid"])
            page_titles[pid] = m["title"]
            page_cats.setdefault(pid, set()).add(cat)
        time.sleep(sleep)

    docs: list[DocumentRecord] = []
    ids = sorted(page_titles)
    for chunk_start in range(0, len(ids), 20):
        chunk = ids[chunk_start : chunk_start + 20]
        data = _api_get(
            session,
            api_url,
            {
                "action": "query",
                "prop": "extracts",
                "exintro": 1,
                "explaintext": 1,
                "pageids": "|".join(str(i) for i in chunk),
            },
            timeout,
        )
        extracts = {p["pageid"]: p.get("extract", "") for p in data.get("query", {}).get("pages", [])}
        for pid in chunk:
            docs.append(
                DocumentRecord(
                    id=str(pid),
                    title=page_titles[pid],
                    text=extracts.get(pid, ""),
                    concepts=tuple(sorted(page_cats.get(pid, ()))),
                )
            )
        time.sleep(sleep)
    graph = ConceptGraph.from_edges(root, edges) if edges else ConceptGraph(
        root=root, nodes=frozenset({root}), edges=frozenset()
    )
    return docs, graph

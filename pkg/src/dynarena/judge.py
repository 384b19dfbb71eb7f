"""Client for an external pairwise alignment judge.

The judge service receives one JSON request per presentation order::

    {"prompt": ..., "checklist": [...], "image_a": ref, "image_b": ref,
     "instruction": <rendered template>}

and must answer with strict JSON ``{"analysis_A", "analysis_B", "winner"}``.
Every pair is judged twice with the candidates swapped; the two verdicts are
mapped back to canonical labels and reconciled by order-swap aggregation.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from typing import Any, Callable, Sequence

import httpx

from .evaluators import Dimension, PairwiseOutcome, order_swap_aggregate
from .rating import Verdict

ENDPOINT_ENV = "DYNARENA_JUDGE_URL"
TEMPLATE_NAME = "alignment_judge_v1.txt"
DEFAULT_TIMEOUT = 120.0
REPLY_KEYS = ("analysis_A", "analysis_B", "winner")


class JudgeError(RuntimeError):
    pass


class JudgeTransportError(JudgeError):
    """The endpoint could not be reached, timed out or answered non-2xx."""


class JudgeProtocolError(JudgeError):
    """The reply was not the strict JSON object the template asks for."""


def load_template(name: str = TEMPLATE_NAME) -> str:
    return resources.files("dynarena.templates").joinpath(name).read_text(encoding="utf-8")


def format_checklist(checklist: Sequence[str]) -> str:
    return "\n".join(f"({i}) {item}" for i, item in enumerate(checklist, 1))


def render_prompt(prompt: str, checklist: Sequence[str], template: str | None = None) -> str:
    template = load_template() if template is None else template
    # the template contains literal JSON braces, so no str.format here
    return template.replace("{prompt_text}", prompt).replace("{checklist_str}", format_checklist(checklist))


def parse_reply(payload: Any) -> Verdict:
    if isinstance(payload, (str, bytes)):
        try:
            payload = json.loads(payload)
        except json.JSONDecodeError as exc:
            raise JudgeProtocolError(f"judge reply is not JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise JudgeProtocolError("judge reply must be a JSON object")
    missing = [k for k in REPLY_KEYS if k not in payload]
    if missing:
        raise JudgeProtocolError(f"judge reply missing keys {missing}")
    winner = payload["winner"]
    if winner not in ("A", "B", "Tie"):
        raise JudgeProtocolError(f"winner must be 'A', 'B' or 'Tie', got {winner!r}")
    return Verdict(winner)


class JudgeClient:
    def __init__(
        self,
        endpoint: str | None = None,
        *,
        timeout: float = DEFAULT_TIMEOUT,
        max_concurrency: int = 4,
        transport: httpx.BaseTransport | None = None,
        template: str | None = None,
    ):
        self.endpoint = endpoint or os.environ.get(ENDPOINT_ENV)
        if not self.endpoint:
            raise JudgeError(f"no judge endpoint configured (set {ENDPOINT_ENV})")
        self.timeout = timeout
        self.max_concurrency = max(1, int(max_concurrency))
        self.template = load_template() if template is None else template
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def close(self) -> None:
        self._client.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def judge_once(self, prompt: str, checklist: Sequence[str], image_a: str, image_b: str) -> Verdict:
        """One request; the verdict is in presentation labels."""
        body = {
            "prompt": prompt,
            "checklist": list(checklist),
            "image_a": image_a,
            "image_b": image_b,
            "instruction": render_prompt(prompt, checklist, self.template),
        }
        try:
            resp = self._client.post(self.endpoint, json=body)
            resp.raise_for_status()
        except httpx.HTTPError as exc:
            raise JudgeTransportError(str(exc)) from exc
        try:
            payload = resp.json()
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise JudgeProtocolError(f"judge reply is not JSON: {exc}") from exc
        return parse_reply(payload)

    def compare(
        self, prompt: str, checklist: Sequence[str], image_ref_a: str, image_ref_b: str, prompt_id: Any = None
    ) -> PairwiseOutcome:
        jobs = [(image_ref_a, image_ref_b), (image_ref_b, image_ref_a)]
        if self.max_concurrency > 1:
            with ThreadPoolExecutor(max_workers=2) as pool:
                first, swapped = pool.map(lambda ab: self.judge_once(prompt, checklist, *ab), jobs)
        else:
            first, swapped = (self.judge_once(prompt, checklist, *ab) for ab in jobs)
        second = swapped.mirrored()
        verdict = order_swap_aggregate(first, second)
        return PairwiseOutcome(
            verdict, Dimension.ALIGNMENT, prompt_id, {"first": first.value, "second": second.value}
        )

    def compare_many(self, items: Sequence[dict]) -> list[PairwiseOutcome]:
        """Judge several prompts; each item has prompt, checklist, image_a, image_b[, prompt_id]."""
        def one(item):
            return self.compare(
                item["prompt"], item.get("checklist", ()), item["image_a"], item["image_b"], item.get("prompt_id")
            )

        workers = max(1, self.max_concurrency // 2)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, items))


def mock_transport(decide: Callable[[dict], Any]) -> httpx.MockTransport:
    """Transport answering each request with ``decide(request_json)``.

    ``decide`` may return a winner label (wrapped into a well-formed reply),
    a dict (sent as JSON) or raw ``bytes`` (sent verbatim).
    """

    def handler(request: httpx.Request) -> httpx.Response:
        body = json.loads(request.content)
        out = decide(body)
        if isinstance(out, bytes):
            return httpx.Response(200, content=out)
        if isinstance(out, str):
            out = {"analysis_A": "mock", "analysis_B": "mock", "winner": out}
        return httpx.Response(200, json=out)

    return httpx.MockTransport(handler)


class ScoreTableJudge:
    """Deterministic mock judge: prefers the image with the higher table score."""

    def __init__(self, scores: dict[str, float], tie_band: float = 0.0):
        self.scores = scores
        self.tie_band = tie_band

    def __call__(self, body: dict) -> str:
        gap = self.scores.get(body["image_a"], 0.0) - self.scores.get(body["image_b"], 0.0)
        if abs(gap) <= self.tie_band:
            return "Tie"
        return "A" if gap > 0 else "B"

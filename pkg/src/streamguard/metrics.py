"""Evaluation metrics: detection rate, warning precision, phase
distribution, weighted safety score, error taxonomy, severity confusion.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from .annotations import AnnotationSet, classify_phase
from .model import (
    CaseAnnotation,
    DANGER_CATEGORIES,
    DIFFICULTY_LEVELS,
    LOCATIONS,
    Phase,
    PhaseScoreTable,
    PredictionRecord,
    SEVERITY_LEVELS,
)


class MetricsError(Exception):
    pass


class EmptyDataset(MetricsError):
    pass


class MissingAnnotation(MetricsError):
    def __init__(self, case_id: str):
        self.case_id = case_id
        super().__init__(f"no annotation for case {case_id!r}")


class ErrorType(str, Enum):
    FORMAT_ERROR = "format_error"
    OVER_REACTION = "over_reaction"
    RESPONSE_LAG = "response_lag"
    VISUAL_OMISSION = "visual_omission"
    REASONING_DEFICIT = "reasoning_deficit"
    NO_ERROR = "no_error"


def _pred_map(preds: Sequence[PredictionRecord]) -> dict:
    out: dict[str, PredictionRecord] = {}
    for p in preds:
        if p.case_id in out:
            raise MetricsError(f"multiple prediction records for case {p.case_id!r}")
        out[p.case_id] = p
    return out


def _check_covered(preds: Sequence[PredictionRecord], anns: AnnotationSet) -> None:
    for p in preds:
        if p.case_id not in anns:
            raise MissingAnnotation(p.case_id)


def compute_hdr(preds: Sequence[PredictionRecord], n_total: int) -> float:
    """Fraction of cases predicted as hazardous, regardless of timing."""
    if n_total < 1:
        raise EmptyDataset("n_total must be >= 1")
    _pred_map(preds)
    return sum(1 for p in preds if p.is_hazard) / n_total


def compute_ewp(preds: Sequence[PredictionRecord], anns: AnnotationSet) -> Optional[float]:
    """Fraction of hazard alerts inside [intent onset, impact].

    Undefined (None) when there are no hazard predictions.
    """
    _check_covered(preds, anns)
    hazards = [p for p in preds if p.is_hazard]
    if not hazards:
        return None
    in_window = 0
    for p in hazards:
        kf = anns[p.case_id].key_frames
        if kf.intent_onset <= p.timestamp <= kf.impact:
            in_window += 1
    return in_window / len(hazards)


def phase_counts(preds: Sequence[PredictionRecord], anns: AnnotationSet) -> dict:
    """Per-phase case counts over the full annotation set.

    Every annotated case lands in exactly one phase; cases without a
    hazard prediction (including format errors) are Missed.
    """
    by_case = _pred_map(preds)
    _check_covered(preds, anns)
    counts = {phase: 0 for phase in Phase}
    for ann in anns:
        pred = by_case.get(ann.case_id)
        t = None if pred is None else pred.effective_timestamp
        counts[classify_phase(t, ann)] += 1
    return counts


def compute_pda(preds: Sequence[PredictionRecord], anns: AnnotationSet) -> dict:
    """Phase fractions over the annotation set; fractions sum to 1."""
    n_total = len(anns)
    if n_total < 1:
        raise EmptyDataset("annotation set is empty")
    counts = phase_counts(preds, anns)
    return {phase: counts[phase] / n_total for phase in Phase}


def compute_wss(preds: Sequence[PredictionRecord], anns: AnnotationSet,
                scores: Optional[PhaseScoreTable] = None) -> float:
    """Mean phase score over all cases."""
    scores = scores or PhaseScoreTable.default()
    n_total = len(anns)
    if n_total < 1:
        raise EmptyDataset("annotation set is empty")
    counts = phase_counts(preds, anns)
    return sum(scores[phase] * n for phase, n in counts.items()) / n_total


def classify_error(pred: Optional[PredictionRecord], ann: CaseAnnotation) -> ErrorType:
    """Assign one case to the five-way error taxonomy.

    Precedence: format error, then premature alert, then late alert, then
    the two Safe-verdict failure modes keyed on reasoning difficulty.
    """
    if pred is not None and pred.parse_status == "format_error":
        return ErrorType.FORMAT_ERROR
    if pred is not None and pred.is_hazard:
        phase = classify_phase(pred.timestamp, ann)
        if phase == Phase.PREMATURE:
            return ErrorType.OVER_REACTION
        if phase in (Phase.IRREVERSIBLE, Phase.MISSED):
            return ErrorType.RESPONSE_LAG
        return ErrorType.NO_ERROR
    # Safe verdict (or no record at all).
    reasoning = "" if pred is None else pred.reasoning_text
    mentioned = mentioned_entities(reasoning, ann.key_entities)
    if ann.difficulty in ("D1", "D2") and not mentioned:
        return ErrorType.VISUAL_OMISSION
    if ann.difficulty == "D3" and mentioned:
        return ErrorType.REASONING_DEFICIT
    return ErrorType.NO_ERROR


def mentioned_entities(text: str, entities: Sequence[str]) -> list:
    """Entities present in text as case-insensitive whole-word matches.

    Multiword entities match as contiguous substrings on word boundaries.
    """
    lowered = text.lower()
    hits = []
    for entity in entities:
        pattern = r"\b" + re.escape(entity) + r"\b"
        if re.search(pattern, lowered):
            hits.append(entity)
    return hits


def error_rates(preds: Sequence[PredictionRecord], anns: AnnotationSet) -> dict:
    """Error-type fractions over the full annotation set."""
    if len(anns) < 1:
        raise EmptyDataset("annotation set is empty")
    by_case = _pred_map(preds)
    _check_covered(preds, anns)
    counts = {e: 0 for e in ErrorType}
    for ann in anns:
        counts[classify_error(by_case.get(ann.case_id), ann)] += 1
    return {e: n / len(anns) for e, n in counts.items()}


SEVERITY_CLAIMS = ("none",) + SEVERITY_LEVELS


@dataclass(frozen=True)
class SeverityConfusion:
    """Counts of claimed vs annotated severity, with bias rates."""

    counts: dict  # (claim, truth) -> int
    n: int
    over_rate: float
    under_rate: float
    exact_rate: float


def severity_confusion(preds: Sequence[PredictionRecord], anns: AnnotationSet) -> SeverityConfusion:
    """5x4 confusion of severity claims (None/L1..L4) against truth (L1..L4)."""
    by_case = _pred_map(preds)
    _check_covered(preds, anns)
    counts = {(c, t): 0 for c in SEVERITY_CLAIMS for t in SEVERITY_LEVELS}
    over = under = exact = n = 0
    for ann in anns:
        pred = by_case.get(ann.case_id)
        if pred is None or pred.severity_claim is None:
            continue
        claim, truth = pred.severity_claim, ann.severity
        counts[(claim, truth)] += 1
        n += 1
        claim_idx = SEVERITY_CLAIMS.index(claim)
        truth_idx = SEVERITY_CLAIMS.index(truth)
        if claim_idx > truth_idx:
            over += 1
        elif claim_idx < truth_idx:
            under += 1
        else:
            exact += 1
    if n == 0:
        return SeverityConfusion(counts=counts, n=0, over_rate=0.0, under_rate=0.0, exact_rate=0.0)
    return SeverityConfusion(counts=counts, n=n, over_rate=over / n,
                             under_rate=under / n, exact_rate=exact / n)


@dataclass(frozen=True)
class MetricsReport:
    """Everything one evaluated model produces for the summary table."""

    n_total: int
    n_pred_hazard: int
    hdr: float
    ewp: Optional[float]
    phase_fractions: dict  # Phase -> float
    wss: float
    error_fractions: dict = field(default_factory=dict)  # ErrorType -> float
    strata: dict = field(default_factory=dict)  # dim -> value -> sub-report dict
    latency_summary: Optional[dict] = None

    def row(self, model: str = "") -> dict:
        """The flat CSV/stdout row mirroring the main results table layout."""
        out = {
            "model": model,
            "n_total": self.n_total,
            "hdr": self.hdr,
            "ewp": "" if self.ewp is None else self.ewp,
            "p_premature": self.phase_fractions[Phase.PREMATURE],
            "p_optimal": self.phase_fractions[Phase.OPTIMAL],
            "p_suboptimal": self.phase_fractions[Phase.SUBOPTIMAL],
            "p_irreversible": self.phase_fractions[Phase.IRREVERSIBLE],
            "p_missed": self.phase_fractions[Phase.MISSED],
            "wss": self.wss,
        }
        for err in ErrorType:
            out[f"err_{err.value}"] = self.error_fractions.get(err, "")
        return out


_STRATA_DIMS = {
    "danger_category": DANGER_CATEGORIES,
    "severity": SEVERITY_LEVELS,
    "difficulty": DIFFICULTY_LEVELS,
    "location": LOCATIONS,
}


def build_report(preds: Sequence[PredictionRecord], anns: AnnotationSet,
                 scores: Optional[PhaseScoreTable] = None,
                 with_strata: bool = False,
                 latency_summary: Optional[dict] = None) -> MetricsReport:
    """Compute the full metric suite for one prediction set."""
    scores = scores or PhaseScoreTable.default()
    n_total = len(anns)
    if n_total < 1:
        raise EmptyDataset("annotation set is empty")
    counts = phase_counts(preds, anns)

    strata: dict = {}
    if with_strata:
        by_case = _pred_map(preds)
        for dim, values in _STRATA_DIMS.items():
            strata[dim] = {}
            for value in values:
                sub_cases = {a.case_id: a for a in anns if getattr(a, dim) == value}
                if not sub_cases:
                    continue
                sub_anns = AnnotationSet(cases=sub_cases, source_path=anns.source_path)
                sub_preds = [by_case[c] for c in sub_cases if c in by_case]
                strata[dim][value] = {
                    "n": len(sub_cases),
                    "hdr": compute_hdr(sub_preds, len(sub_cases)),
                    "wss": compute_wss(sub_preds, sub_anns, scores),
                }

    return MetricsReport(
        n_total=n_total,
        n_pred_hazard=sum(1 for p in preds if p.is_hazard),
        hdr=compute_hdr(list(preds), n_total),
        ewp=compute_ewp(preds, anns),
        phase_fractions={phase: counts[phase] / n_total for phase in Phase},
        wss=sum(scores[phase] * n for phase, n in counts.items()) / n_total,
        error_fractions=error_rates(preds, anns),
        strata=strata,
        latency_summary=latency_summary,
    )

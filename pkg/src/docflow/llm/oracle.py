"""Deterministic rule-based chat provider for the synthetic incident corpus.

Acceptance tests must run offline, so the semantic operators are exercised
against this provider: it answers extract/filter/reduce/generate prompts by
reading the labeled lines and cause phrasing that the corpus generator writes
into report text. The constants below are the shared text conventions; the
generator imports them so both sides stay in lockstep.
"""

from __future__ import annotations

import json
import re
from typing import Any, Callable, Optional

from docflow.errors import ProviderError
from docflow.llm.base import LlmRequest
from docflow.model.document import canonical_json
from docflow.ops.prompts import DOC_MARKER_CLOSE, DOC_MARKER_OPEN

# ---------------------------------------------------------------------------
# Shared corpus text conventions
# ---------------------------------------------------------------------------

FIELD_LABELS = {
    "accidentNumber": "Accident Number",
    "aircraft": "Aircraft",
    "aircraftManufacturer": "Aircraft Manufacturer",
    "aircraftDamage": "Aircraft Damage",
    "conditionOfLight": "Condition of Light",
    "conditions": "Conditions",
    "dateAndTime": "Date and Time",
    "departureAirport": "Departure Airport",
    "destinationAirport": "Destination Airport",
    "flightConductedUnder": "Flight Conducted Under",
    "injuries": "Injuries",
    "highestInjuryLevel": "Highest Injury Level",
    "location": "Location",
    "numberOfEngines": "Number of Engines",
    "operator": "Operator",
    "registration": "Registration",
    "temperatureC": "Temperature",
    "visibilityMiles": "Visibility",
    "windDirectionDegrees": "Wind Direction",
    "windSpeedKnots": "Wind Speed",
}

STATE_ABBREV = {
    "Alabama": "AL", "Alaska": "AK", "Arizona": "AZ", "Arkansas": "AR",
    "California": "CA", "Colorado": "CO", "Florida": "FL", "Georgia": "GA",
    "Hawaii": "HI", "Idaho": "ID", "Illinois": "IL", "Indiana": "IN",
    "Iowa": "IA", "Kansas": "KS", "Kentucky": "KY", "Michigan": "MI",
    "Minnesota": "MN", "Missouri": "MO", "Montana": "MT", "Nebraska": "NE",
    "Nevada": "NV", "New York": "NY", "North Carolina": "NC", "Ohio": "OH",
    "Oklahoma": "OK", "Oregon": "OR", "Pennsylvania": "PA", "Tennessee": "TN",
    "Texas": "TX", "Washington": "WA", "Wisconsin": "WI",
}

MONTHS = {
    "January": 1, "February": 2, "March": 3, "April": 4, "May": 5, "June": 6,
    "July": 7, "August": 8, "September": 9, "October": 10, "November": 11, "December": 12,
}

PROBABLE_CAUSE_LEAD = "The National Transportation Safety Board determines the probable cause(s) of this accident to be:"

DISCLAIMER_TEXT = (
    "The NTSB does not assign fault or blame for accidents or incidents; "
    "investigations are fact-finding proceedings with no adverse parties and "
    "are not conducted to determine the rights or liabilities of any person."
)

REFUSAL_ANSWER = (
    "The NTSB does not assign fault or blame for accidents or incidents, "
    "so this question cannot be answered from the provided reports."
)

# Category markers, matched against the probable-cause line in priority order.
_CAUSE_MARKERS: list[tuple[str, str]] = [
    ("bird", r"collision with a flock of birds"),
    ("fuel", r"fuel contamination|fuel exhaustion|water from the fuel"),
    ("weather", r"an encounter with"),
    ("maintenance", r"inadequate maintenance"),
    ("engine", r"mechanical failure of the engine"),
    ("pilot", r"failure to maintain directional control"),
]

_CAUSE_LINE_RE = re.compile(re.escape(PROBABLE_CAUSE_LEAD) + r"\s*(.+)")
_LOCATION_RE = re.compile(r"^Location:\s*(.+?),\s*([A-Z][A-Za-z ]+)$", re.MULTILINE)
_COORDS_RE = re.compile(
    r"located at (-?\d+(?:\.\d+)?) degrees north latitude and (-?\d+(?:\.\d+)?) degrees west longitude"
)
_PART_RE = re.compile(r"damage to the ([a-z][a-z ]*?)\.")
_WEATHER_FEATURE_RE = re.compile(r"an encounter with ([a-z][a-z\- ]*?),")
_DATE_LINE_RE = re.compile(r"^Date and Time:\s*([A-Z][a-z]+) (\d{1,2}), (\d{4})", re.MULTILINE)
_NARRATIVE_DATE_RE = re.compile(r"\bOn ([A-Z][a-z]+) (\d{1,2}), (\d{4}),")
_NUMBER_RE = re.compile(r"-?\d+(?:\.\d+)?")


def labeled_line(text: str, label: str) -> Optional[str]:
    m = re.search(rf"^{re.escape(label)}:\s*(.+)$", text, re.MULTILINE)
    return m.group(1).strip() if m else None


def probable_cause_of(text: str) -> Optional[str]:
    m = _CAUSE_LINE_RE.search(text)
    return m.group(1).strip() if m else None


def cause_category_of(text: str) -> Optional[str]:
    cause = probable_cause_of(text)
    if cause is None:
        return None
    for category, pattern in _CAUSE_MARKERS:
        if re.search(pattern, cause):
            return category
    return None


def state_of(text: str) -> Optional[str]:
    m = _LOCATION_RE.search(text)
    return m.group(2).strip() if m else None


def iso_date_of(text: str) -> Optional[str]:
    m = _DATE_LINE_RE.search(text) or _NARRATIVE_DATE_RE.search(text)
    if not m:
        return None
    month = MONTHS.get(m.group(1))
    if month is None:
        return None
    return f"{int(m.group(3)):04d}-{month:02d}-{int(m.group(2)):02d}"


def damaged_part_of(text: str) -> Optional[str]:
    cause = probable_cause_of(text)
    if cause is None:
        return None
    m = _PART_RE.search(cause)
    return m.group(1) if m else None


def weather_feature_of(text: str) -> Optional[str]:
    m = _WEATHER_FEATURE_RE.search(text)
    return m.group(1) if m else None


def _first_number(raw: Optional[str]) -> Optional[str]:
    if raw is None:
        return None
    m = _NUMBER_RE.search(raw)
    return m.group(0) if m else None


def _camel_to_label(name: str) -> str:
    words = re.sub(r"(?<!^)(?=[A-Z])", " ", name).split()
    return " ".join(w.capitalize() if w.islower() else w for w in words)


def extract_field(name: str, text: str) -> Any:
    """Extract one field value (still as text where textual) from report text."""
    if name == "us_state":
        return state_of(text)
    if name == "us_state_abbrev":
        state = state_of(text)
        return STATE_ABBREV.get(state) if state else None
    if name == "probable_cause":
        return probable_cause_of(text)
    if name == "cause_category":
        return cause_category_of(text)
    if name == "damaged_part":
        return damaged_part_of(text)
    if name == "weather_related":
        return "weather conditions" in text
    if name == "date":
        return iso_date_of(text)
    if name == "latitude":
        m = _COORDS_RE.search(text)
        return float(m.group(1)) if m else None
    if name == "longitude":
        m = _COORDS_RE.search(text)
        return -float(m.group(2)) if m else None
    label = FIELD_LABELS.get(name, _camel_to_label(name))
    raw = labeled_line(text, label)
    if name in ("temperatureC", "visibilityMiles", "windDirectionDegrees", "windSpeedKnots", "numberOfEngines"):
        return _first_number(raw)
    return raw


# ---------------------------------------------------------------------------
# Question rules (shared by the filter purpose and the RAG-style generate)
# ---------------------------------------------------------------------------

_STATE_IN_QUESTION = re.compile(
    r"\b(" + "|".join(sorted(STATE_ABBREV, key=len, reverse=True)) + r")\b"
)


def question_predicate(question: str) -> Callable[[str], bool]:
    """Compile a benchmark-style question into a predicate over report text.

    Conditions found in the question are conjoined. Questions with no
    recognized condition yield an always-false predicate (conservative).
    """
    q = question.lower()
    conditions: list[Callable[[str], bool]] = []

    if re.search(r"engine (problem|failure|issue)", q) or "due to engine" in q:
        conditions.append(lambda t: cause_category_of(t) == "engine")
    if "bird" in q:
        # the narrative mentions the strike too, so partial (chunk-level) text still answers
        conditions.append(lambda t: "flock of birds" in t)
    if "water" in q and "fuel" in q:
        conditions.append(lambda t: cause_category_of(t) == "fuel" and "water from the fuel" in (probable_cause_of(t) or ""))
    elif re.search(r"fuel[- ](related|problem)|due to fuel", q):
        conditions.append(lambda t: cause_category_of(t) == "fuel")
    if "weather" in q:
        conditions.append(lambda t: cause_category_of(t) == "weather")
    if "maintenance" in q:
        conditions.append(lambda t: cause_category_of(t) == "maintenance")

    m = _STATE_IN_QUESTION.search(question)
    if m:
        state = m.group(1)
        conditions.append(lambda t, s=state: state_of(t) == s)

    for month_name, month_num in MONTHS.items():
        if month_name.lower() in q:
            conditions.append(lambda t, mn=month_num: (iso_date_of(t) or "....-..").split("-")[1] == f"{mn:02d}")
            break
    year_match = re.search(r"\b(19|20)\d{2}\b", q)
    if year_match:
        year = year_match.group(0)
        conditions.append(lambda t, y=year: (iso_date_of(t) or "").startswith(y))

    if "destroyed" in q:
        conditions.append(lambda t: labeled_line(t, "Aircraft Damage") == "Destroyed")
    elif "substantial damage" in q:
        conditions.append(
            lambda t: labeled_line(t, "Aircraft Damage") in ("Substantial", "Destroyed")
            or "substantial damage" in (probable_cause_of(t) or "")
        )
    if "fatal" in q:
        conditions.append(lambda t: labeled_line(t, "Highest Injury Level") == "Fatal")

    for maker in ("Cessna", "Piper", "Beechcraft", "Cirrus", "Mooney", "Robinson", "Bell", "Diamond"):
        if maker.lower() in q:
            conditions.append(lambda t, mk=maker: mk in (labeled_line(t, "Aircraft") or ""))
            break

    if not conditions:
        return lambda _t: False
    return lambda t: all(c(t) for c in conditions)


# ---------------------------------------------------------------------------
# Prompt parsing
# ---------------------------------------------------------------------------

_FIELDS_RE = re.compile(r"FIELDS:\n(.*?)\n\nDOCUMENT:\n(.*)", re.DOTALL)
_QUESTION_RE = re.compile(r"QUESTION:\n(.*?)\n\n(?:DOCUMENT|CONTEXT):\n(.*)", re.DOTALL)
_FILTER_DOC_RE = re.compile(r"QUESTION:\n(.*?)\n\nDOCUMENT:\n(.*)", re.DOTALL)
_REDUCE_RE = re.compile(r"INSTRUCTIONS:\n(.*?)\n\nDOCUMENTS:\n(.*)", re.DOTALL)

_ENTRY_RE = re.compile(
    re.escape(DOC_MARKER_OPEN) + r"(.+?)" + re.escape(DOC_MARKER_CLOSE) + r"\n(.*?)(?=\n" + re.escape(DOC_MARKER_OPEN) + r"|\Z)",
    re.DOTALL,
)


def parse_context_entries(context: str) -> list[tuple[str, str]]:
    return [(m.group(1), m.group(2).strip()) for m in _ENTRY_RE.finditer(context)]


class OracleProvider:
    """Answers semantic-operator prompts with corpus rules. No randomness."""

    provider_id = "oracle"

    def complete(self, request: LlmRequest) -> str:
        if request.purpose == "extract":
            return self._extract(request.user_prompt)
        if request.purpose == "filter":
            return self._filter(request.user_prompt)
        if request.purpose == "reduce":
            return self._reduce(request.user_prompt)
        if request.purpose == "generate":
            return self._generate(request.user_prompt)
        raise ProviderError(f"oracle provider does not handle purpose {request.purpose!r}", retryable=False)

    def _extract(self, prompt: str) -> str:
        m = _FIELDS_RE.search(prompt)
        if not m:
            raise ProviderError("unparseable extract prompt", retryable=False)
        fields = json.loads(m.group(1))
        text = m.group(2)
        out: dict[str, Any] = {}
        for f in fields:
            value = extract_field(f["name"], text)
            if value is not None:
                out[f["name"]] = value
        return json.dumps(out, ensure_ascii=False)

    def _filter(self, prompt: str) -> str:
        m = _FILTER_DOC_RE.search(prompt)
        if not m:
            raise ProviderError("unparseable filter prompt", retryable=False)
        question, text = m.group(1).strip(), m.group(2)
        return "true" if question_predicate(question)(text) else "false"

    def _reduce(self, prompt: str) -> str:
        m = _REDUCE_RE.search(prompt)
        if not m:
            raise ProviderError("unparseable reduce prompt", retryable=False)
        entries = parse_context_entries(m.group(2))
        ids = ", ".join(e[0] for e in entries)
        return f"Combined summary of {len(entries)} report(s): {ids}."

    # -- generate ----------------------------------------------------------

    def _generate(self, prompt: str) -> str:
        m = _QUESTION_RE.search(prompt)
        if not m:
            raise ProviderError("unparseable generate prompt", retryable=False)
        question, context = m.group(1).strip(), m.group(2)
        entries = parse_context_entries(context)

        if any(DISCLAIMER_TEXT[:40] in text for _id, text in entries):
            return REFUSAL_ANSWER

        rows = _rows_from_entries(entries)
        q = question.lower()

        if q.startswith("what fraction") and len(rows) >= 2 and all("count" in r for r in rows[:2]):
            denominator = rows[1]["count"]
            if denominator == 0:
                return "undefined (no matching incidents)"
            return f"{rows[0]['count'] / denominator:.3f}"

        if "summarize" in q and "weather" in q:
            return summarize_weather_themes([text for _id, text in entries])

        # RAG-style: evaluate the question against whatever report text is
        # visible, grouping visible chunks per source report.
        per_doc: dict[str, list[str]] = {}
        for doc_id, text in entries:
            per_doc.setdefault(doc_id, []).append(text)
        predicate = question_predicate(question)
        matches = sorted(d for d, texts in per_doc.items() if predicate("\n".join(texts)))

        if re.search(r"^how many|^what number", q):
            return str(len(matches))
        if re.search(r"^(which|list)", q):
            return ", ".join(matches) if matches else "none"
        return "Unable to determine the answer from the provided context."


def _rows_from_entries(entries: list[tuple[str, str]]) -> list[dict]:
    rows = []
    for _id, text in entries:
        stripped = text.strip()
        if stripped.startswith("{"):
            try:
                rows.append(json.loads(stripped))
            except json.JSONDecodeError:
                pass
    return rows


def format_weather_summary(counts: dict[str, int]) -> str:
    """The answer template for weather-theme summaries (shared with ground truth)."""
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:3]
    if not ranked:
        return "No weather-related incidents were found."
    body = ", ".join(f"{name} ({count} incidents)" for name, count in ranked)
    return f"Across {sum(counts.values())} weather-related incidents, the most common conditions were: {body}."


def summarize_weather_themes(texts: list[str]) -> str:
    """Deterministic weather-theme summary: top conditions by count, name-tiebroken."""
    counts: dict[str, int] = {}
    for text in texts:
        feature = weather_feature_of(text)
        if feature:
            counts[feature] = counts.get(feature, 0) + 1
    return format_weather_summary(counts)


def render_properties_text(properties: dict) -> str:
    """Stable text form for documents that carry only structured properties."""
    return canonical_json(properties).decode("utf-8")

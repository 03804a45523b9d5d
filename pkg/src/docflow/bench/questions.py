"""The 30-question benchmark and its ground truth.

Ground truth is computed from the generator's incident records; a separate
brute-force evaluator re-derives the same answers from the rendered documents
(see evaluator.py), and a test holds the two equal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from docflow.llm.oracle import format_weather_summary
from docflow.bench.corpus import Incident

# Extraction schema used at ingest time (mirrors the published report fields).
INGEST_FIELDS = [
    {"name": "accidentNumber", "dtype": "string", "description": "report accident number"},
    {"name": "aircraft", "dtype": "string", "description": "aircraft make and model"},
    {"name": "aircraftManufacturer", "dtype": "string", "description": "aircraft manufacturer name"},
    {"name": "aircraftDamage", "dtype": "string", "description": "damage level: Destroyed, Substantial, Minor, or None"},
    {"name": "date", "dtype": "string", "description": "incident date in ISO format (YYYY-MM-DD)"},
    {"name": "dateAndTime", "dtype": "string", "description": "incident date and local time as printed in the report"},
    {"name": "location", "dtype": "string", "description": "city and state of the incident"},
    {"name": "conditionOfLight", "dtype": "string", "description": "light conditions: Day, Night, Dusk, or Dawn"},
    {"name": "conditions", "dtype": "string", "description": "meteorological conditions: Visual (VMC) or Instrument (IMC)"},
    {"name": "flightConductedUnder", "dtype": "string", "description": "regulatory part the flight operated under"},
    {"name": "highestInjuryLevel", "dtype": "string", "description": "most severe injury: Fatal, Serious, Minor, or None"},
    {"name": "injuries", "dtype": "string", "description": "injury summary, e.g. '3 Serious'"},
    {"name": "numberOfEngines", "dtype": "int", "description": "number of engines on the aircraft"},
    {"name": "operator", "dtype": "string", "description": "operator of the aircraft"},
    {"name": "registration", "dtype": "string", "description": "aircraft registration number"},
    {"name": "departureAirport", "dtype": "string", "description": "departure airport"},
    {"name": "destinationAirport", "dtype": "string", "description": "destination airport"},
    {"name": "temperatureC", "dtype": "float", "description": "temperature in degrees Celsius"},
    {"name": "visibilityMiles", "dtype": "float", "description": "visibility in statute miles"},
    {"name": "windDirectionDegrees", "dtype": "int", "description": "wind direction in degrees"},
    {"name": "windSpeedKnots", "dtype": "int", "description": "wind speed in knots"},
]


@dataclass(frozen=True)
class BenchmarkQuestion:
    id: str
    text: str
    answer_type: str  # scalar | table | doc-list | text
    category: str  # metadata-only | hybrid | semantic
    columns: Optional[tuple[str, ...]] = None
    setup: tuple[str, ...] = ()  # prior turns sent in the same session


QUESTIONS: list[BenchmarkQuestion] = [
    BenchmarkQuestion("q01", "How many incidents were there by state?", "table", "hybrid", ("us_state", "count")),
    BenchmarkQuestion(
        "q02",
        "What fraction of incidents that resulted in substantial damage were due to engine problems?",
        "text",
        "hybrid",
    ),
    BenchmarkQuestion(
        "q03",
        "In incidents involving Piper aircraft, what was the most commonly damaged part of the aircraft?",
        "table",
        "hybrid",
        ("damaged_part", "count"),
    ),
    BenchmarkQuestion("q04", "Which incidents occurred in July involving birds?", "doc-list", "hybrid"),
    BenchmarkQuestion("q05", "How many incidents were there in Hawaii?", "scalar", "hybrid"),
    BenchmarkQuestion("q06", "How many incidents involved substantial damage?", "scalar", "metadata-only"),
    BenchmarkQuestion("q07", "How many incidents were due to engine problems?", "scalar", "hybrid"),
    BenchmarkQuestion(
        "q08", "How many incidents were there, broken down by number of engines?", "table", "metadata-only",
        ("numberOfEngines", "count"),
    ),
    BenchmarkQuestion(
        "q09", "What was the breakdown of incidents by aircraft manufacturer?", "table", "metadata-only",
        ("aircraftManufacturer", "count"),
    ),
    BenchmarkQuestion("q10", "How many incidents are in the collection in total?", "scalar", "metadata-only"),
    BenchmarkQuestion("q11", "How many incidents occurred in 2023?", "scalar", "metadata-only"),
    BenchmarkQuestion("q12", "How many incidents involved Cessna aircraft?", "scalar", "metadata-only"),
    BenchmarkQuestion(
        "q13",
        "Get the latitude and longitude of all incidents in 2023 involving Cessna aircraft",
        "table",
        "hybrid",
        ("accidentNumber", "latitude", "longitude"),
    ),
    BenchmarkQuestion("q14", "How many incidents resulted in fatal injuries?", "scalar", "metadata-only"),
    BenchmarkQuestion("q15", "Which incidents resulted in the aircraft being destroyed?", "doc-list", "metadata-only"),
    BenchmarkQuestion("q16", "What was the highest wind speed recorded in any incident?", "scalar", "metadata-only"),
    BenchmarkQuestion(
        "q17",
        "What was the average temperature in degrees Celsius for incidents in instrument meteorological conditions?",
        "scalar",
        "metadata-only",
    ),
    BenchmarkQuestion("q18", "How many incidents occurred at night?", "scalar", "metadata-only"),
    BenchmarkQuestion("q19", "How many incidents were weather-related?", "scalar", "hybrid"),
    BenchmarkQuestion("q20", "Which incidents involved bird strikes?", "doc-list", "hybrid"),
    BenchmarkQuestion("q21", "How many incidents involved agricultural flights?", "scalar", "metadata-only"),
    BenchmarkQuestion("q22", "How many incidents were due to fuel-related problems?", "scalar", "hybrid"),
    BenchmarkQuestion("q23", "List the incidents in California involving engine problems.", "doc-list", "hybrid"),
    BenchmarkQuestion(
        "q24", "How many incidents were there by aircraft damage level?", "table", "metadata-only",
        ("aircraftDamage", "count"),
    ),
    BenchmarkQuestion("q25", "Summarize the common themes among incidents caused by weather.", "text", "semantic"),
    BenchmarkQuestion(
        "q26", "What were the most common categories of probable cause?", "table", "semantic",
        ("cause_category", "count"),
    ),
    BenchmarkQuestion(
        "q27", "What are the three most common aircraft models involved in incidents?", "table", "metadata-only",
        ("aircraft", "count"),
    ),
    BenchmarkQuestion("q28", "Which incident recorded the highest wind speed?", "doc-list", "metadata-only"),
    BenchmarkQuestion("q29", "How many incidents involved water contamination of the fuel?", "scalar", "hybrid"),
    BenchmarkQuestion(
        "q30", "What about incidents without substantial damage?", "scalar", "metadata-only", None, ("q06",)
    ),
]

QUESTIONS_BY_ID = {q.id: q for q in QUESTIONS}


def _count_rows(incidents: Sequence[Incident], key: Callable[[Incident], object]) -> list[list]:
    counts: dict = {}
    for inc in incidents:
        counts[key(inc)] = counts.get(key(inc), 0) + 1
    return [[k, v] for k, v in sorted(counts.items(), key=lambda kv: str(kv[0]))]


def _substantial(inc: Incident) -> bool:
    return inc.damage in ("Substantial", "Destroyed")


def ground_truth(incidents: Sequence[Incident]) -> dict:
    """Per-question expected answers, recomputable by brute force over the docs."""
    by_number = sorted(incidents, key=lambda i: i.accident_number)

    substantial = [i for i in by_number if _substantial(i)]
    engine = [i for i in by_number if i.cause_category == "engine"]
    engine_substantial = [i for i in engine if _substantial(i)]
    piper = [i for i in by_number if i.manufacturer == "Piper"]
    piper_parts = _count_rows(piper, lambda i: i.part)
    top_piper = sorted(piper_parts, key=lambda r: (-r[1], str(r[0])))[:1]
    imc = [i for i in by_number if i.conditions == "Instrument (IMC)"]
    imc_temps = [i.temperature_c for i in imc]
    weather = [i for i in by_number if i.cause_category == "weather"]
    weather_counts: dict[str, int] = {}
    for inc in weather:
        if inc.weather_feature:
            weather_counts[inc.weather_feature] = weather_counts.get(inc.weather_feature, 0) + 1
    models = _count_rows(by_number, lambda i: i.aircraft)
    top_models = sorted(models, key=lambda r: (-r[1], str(r[0])))[:3]
    max_wind = max((i.wind_speed for i in by_number), default=0)

    values: dict[str, object] = {
        "q01": _count_rows(by_number, lambda i: i.state),
        "q02": (f"{len(engine_substantial) / len(substantial):.3f}" if substantial else "undefined (no matching incidents)"),
        "q03": top_piper,
        "q04": sorted(i.accident_number for i in by_number if i.cause_category == "bird" and i.incident_date.month == 7),
        "q05": sum(1 for i in by_number if i.state == "Hawaii"),
        "q06": len(substantial),
        "q07": len(engine),
        "q08": _count_rows(by_number, lambda i: i.engines),
        "q09": _count_rows(by_number, lambda i: i.manufacturer),
        "q10": len(by_number),
        "q11": sum(1 for i in by_number if i.incident_date.year == 2023),
        "q12": sum(1 for i in by_number if i.manufacturer == "Cessna"),
        "q13": [
            [i.accident_number, i.latitude, -i.longitude_west]
            for i in by_number
            if i.manufacturer == "Cessna" and i.incident_date.year == 2023
        ],
        "q14": sum(1 for i in by_number if i.injury_level == "Fatal"),
        "q15": sorted(i.accident_number for i in by_number if i.damage == "Destroyed"),
        "q16": max_wind,
        "q17": (sum(imc_temps) / len(imc_temps)) if imc_temps else None,
        "q18": sum(1 for i in by_number if i.condition_of_light == "Night"),
        "q19": len(weather),
        "q20": sorted(i.accident_number for i in by_number if i.cause_category == "bird"),
        "q21": sum(1 for i in by_number if i.flight_under.startswith("Part 137")),
        "q22": sum(1 for i in by_number if i.cause_category == "fuel"),
        "q23": sorted(i.accident_number for i in engine if i.state == "California"),
        "q24": _count_rows(by_number, lambda i: i.damage),
        "q25": format_weather_summary(weather_counts),
        "q26": _count_rows(by_number, lambda i: i.cause_category),
        "q27": top_models,
        "q28": sorted(i.accident_number for i in by_number if i.wind_speed == max_wind) if by_number else [],
        "q29": sum(1 for i in by_number if i.cause_category == "fuel" and i.cause_subtype == "water"),
        "q30": sum(1 for i in by_number if not _substantial(i)),
    }

    questions = {}
    for q in QUESTIONS:
        entry: dict[str, object] = {
            "text": q.text,
            "answer_type": q.answer_type,
            "category": q.category,
            "value": values[q.id],
        }
        if q.columns:
            entry["columns"] = list(q.columns)
        if q.setup:
            entry["setup"] = list(q.setup)
        questions[q.id] = entry
    return {"questions": questions}

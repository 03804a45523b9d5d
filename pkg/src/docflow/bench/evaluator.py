"""Independent brute-force evaluator.

Recomputes every benchmark answer straight from the rendered corpus files with
its own regexes — no generator state, no engine, no oracle provider. A test
holds its output equal to the shipped ground truth, which is what makes the
ground-truth file trustworthy.
"""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Optional

from docflow.llm.oracle import format_weather_summary

_LINE = lambda label: re.compile(rf"^{re.escape(label)}: (.+)$", re.MULTILINE)  # noqa: E731

_RE_ACCIDENT = _LINE("Accident Number")
_RE_DAMAGE = _LINE("Aircraft Damage")
_RE_AIRCRAFT = _LINE("Aircraft")
_RE_MAKER = _LINE("Aircraft Manufacturer")
_RE_ENGINES = _LINE("Number of Engines")
_RE_INJURY = _LINE("Highest Injury Level")
_RE_LIGHT = _LINE("Condition of Light")
_RE_CONDITIONS = _LINE("Conditions")
_RE_FLIGHT = _LINE("Flight Conducted Under")
_RE_LOCATION = _LINE("Location")
_RE_WIND = re.compile(r"^Wind Speed: (\d+) knots$", re.MULTILINE)
_RE_TEMP = re.compile(r"^Temperature: (-?[\d.]+) C$", re.MULTILINE)
_RE_DATE = re.compile(r"^Date and Time: ([A-Z][a-z]+) (\d{1,2}), (\d{4})", re.MULTILINE)
_RE_COORDS = re.compile(r"located at ([\d.]+) degrees north latitude and ([\d.]+) degrees west longitude")
_RE_CAUSE = re.compile(r"probable cause\(s\) of this accident to be: (.+)")
_RE_PART = re.compile(r"damage to the ([a-z][a-z ]*?)\.")
_RE_WEATHER_FEATURE = re.compile(r"an encounter with ([a-z][a-z\- ]*?),")

_MONTHS = {
    "January": 1, "February": 2, "March": 3, "April": 4, "May": 5, "June": 6,
    "July": 7, "August": 8, "September": 9, "October": 10, "November": 11, "December": 12,
}


def _category(cause: str) -> str:
    if "collision with a flock of birds" in cause:
        return "bird"
    if "fuel contamination" in cause or "fuel exhaustion" in cause or "water from the fuel" in cause:
        return "fuel"
    if "an encounter with" in cause:
        return "weather"
    if "inadequate maintenance" in cause:
        return "maintenance"
    if "mechanical failure of the engine" in cause:
        return "engine"
    return "pilot"


def read_facts(doc_path: Path) -> dict:
    payload = json.loads(doc_path.read_text(encoding="utf-8"))
    text = "\n".join(
        e["text_representation"] for e in payload["elements"] if e.get("text_representation") is not None
    )

    def grab(pattern: re.Pattern, cast=str) -> Optional[object]:
        m = pattern.search(text)
        return cast(m.group(1)) if m else None

    month_match = _RE_DATE.search(text)
    year = int(month_match.group(3)) if month_match else None
    month = _MONTHS.get(month_match.group(1)) if month_match else None
    cause = grab(_RE_CAUSE) or ""
    coords = _RE_COORDS.search(text)
    return {
        "accidentNumber": grab(_RE_ACCIDENT),
        "damage": grab(_RE_DAMAGE),
        "aircraft": grab(_RE_AIRCRAFT),
        "manufacturer": grab(_RE_MAKER),
        "engines": grab(_RE_ENGINES, int),
        "injury": grab(_RE_INJURY),
        "light": grab(_RE_LIGHT),
        "conditions": grab(_RE_CONDITIONS),
        "flight_under": grab(_RE_FLIGHT),
        "state": (grab(_RE_LOCATION) or ", ").split(", ")[-1],
        "wind": grab(_RE_WIND, int),
        "temperature": grab(_RE_TEMP, float),
        "year": year,
        "month": month,
        "cause": cause,
        "category": _category(cause),
        "part": (_RE_PART.search(cause).group(1) if _RE_PART.search(cause) else None),
        "weather_feature": (_RE_WEATHER_FEATURE.search(cause).group(1) if _RE_WEATHER_FEATURE.search(cause) else None),
        "latitude": float(coords.group(1)) if coords else None,
        "longitude": -float(coords.group(2)) if coords else None,
    }


def _rows(facts: list[dict], key: str) -> list[list]:
    counts: dict = {}
    for f in facts:
        counts[f[key]] = counts.get(f[key], 0) + 1
    return [[k, v] for k, v in sorted(counts.items(), key=lambda kv: str(kv[0]))]


def recompute_answers(corpus_dir: Path | str) -> dict:
    docs_dir = Path(corpus_dir) / "docs"
    facts = sorted((read_facts(p) for p in sorted(docs_dir.glob("*.json"))), key=lambda f: f["accidentNumber"])

    substantial = [f for f in facts if f["damage"] in ("Substantial", "Destroyed")]
    engine = [f for f in facts if f["category"] == "engine"]
    piper = [f for f in facts if f["manufacturer"] == "Piper"]
    piper_parts = _rows(piper, "part")
    imc_temps = [f["temperature"] for f in facts if f["conditions"] == "Instrument (IMC)"]
    weather_counts: dict[str, int] = {}
    for f in facts:
        if f["category"] == "weather" and f["weather_feature"]:
            weather_counts[f["weather_feature"]] = weather_counts.get(f["weather_feature"], 0) + 1
    models = _rows(facts, "aircraft")
    max_wind = max((f["wind"] for f in facts), default=0)

    return {
        "q01": _rows(facts, "state"),
        "q02": (
            f"{sum(1 for f in engine if f['damage'] in ('Substantial', 'Destroyed')) / len(substantial):.3f}"
            if substantial
            else "undefined (no matching incidents)"
        ),
        "q03": sorted(piper_parts, key=lambda r: (-r[1], str(r[0])))[:1],
        "q04": sorted(f["accidentNumber"] for f in facts if f["category"] == "bird" and f["month"] == 7),
        "q05": sum(1 for f in facts if f["state"] == "Hawaii"),
        "q06": len(substantial),
        "q07": len(engine),
        "q08": _rows(facts, "engines"),
        "q09": _rows(facts, "manufacturer"),
        "q10": len(facts),
        "q11": sum(1 for f in facts if f["year"] == 2023),
        "q12": sum(1 for f in facts if f["manufacturer"] == "Cessna"),
        "q13": [
            [f["accidentNumber"], f["latitude"], f["longitude"]]
            for f in facts
            if f["manufacturer"] == "Cessna" and f["year"] == 2023
        ],
        "q14": sum(1 for f in facts if f["injury"] == "Fatal"),
        "q15": sorted(f["accidentNumber"] for f in facts if f["damage"] == "Destroyed"),
        "q16": max_wind,
        "q17": (sum(imc_temps) / len(imc_temps)) if imc_temps else None,
        "q18": sum(1 for f in facts if f["light"] == "Night"),
        "q19": sum(1 for f in facts if f["category"] == "weather"),
        "q20": sorted(f["accidentNumber"] for f in facts if f["category"] == "bird"),
        "q21": sum(1 for f in facts if (f["flight_under"] or "").startswith("Part 137")),
        "q22": sum(1 for f in facts if f["category"] == "fuel"),
        "q23": sorted(f["accidentNumber"] for f in engine if f["state"] == "California"),
        "q24": _rows(facts, "damage"),
        "q25": format_weather_summary(weather_counts),
        "q26": _rows(facts, "category"),
        "q27": sorted(models, key=lambda r: (-r[1], str(r[0])))[:3],
        "q28": sorted(f["accidentNumber"] for f in facts if f["wind"] == max_wind) if facts else [],
        "q29": sum(1 for f in facts if "water from the fuel" in f["cause"]),
        "q30": sum(1 for f in facts if f["damage"] in ("Minor", "None")),
    }

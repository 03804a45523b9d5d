"""Synthetic aviation-incident corpus with embedded ground truth.

Generation is a pure function of the corpus spec object: exact value multisets
are shuffled with a seeded RNG and then adjusted by deterministic fixups so the
population has the shape the benchmark needs (94 substantial-or-worse reports,
21 engine-cause reports, exactly two July bird strikes, a Hawaii count of
zero, ...). Every report is rendered as ingestion JSON whose text encodes all
properties in labeled lines and fixed cause phrasing, which is exactly the
signal the rule-based oracle provider reads back.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from datetime import date
from pathlib import Path
from random import Random
from typing import Optional

from docflow.llm.oracle import DISCLAIMER_TEXT, FIELD_LABELS, PROBABLE_CAUSE_LEAD

DEFAULT_SEED = 7
BENCH_INDEX = "ntsb"

MONTH_NAMES = [
    "January", "February", "March", "April", "May", "June",
    "July", "August", "September", "October", "November", "December",
]


@dataclass(frozen=True)
class SyntheticCorpusSpec:
    n_docs: int = 100
    seed: int = DEFAULT_SEED
    include_disclaimer: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Incident:
    accident_number: str
    aircraft: str
    manufacturer: str
    engines: int
    damage: str
    cause_category: str
    cause_subtype: Optional[str]
    part: str
    weather_feature: Optional[str]
    phase: str
    component: str
    incident_date: date
    time_str: str
    city: str
    state: str
    condition_of_light: str
    conditions: str
    flight_under: str
    injury_level: str
    injury_count: int
    operator: str
    registration: str
    temperature_c: float
    visibility_miles: float
    wind_direction: int
    wind_speed: int
    latitude: float
    longitude_west: float
    departure: str
    destination: str
    mentions_engine_runup: bool

    @property
    def iso_date(self) -> str:
        return self.incident_date.isoformat()

    @property
    def date_human(self) -> str:
        d = self.incident_date
        return f"{MONTH_NAMES[d.month - 1]} {d.day}, {d.year}"

    @property
    def injuries_text(self) -> str:
        if self.injury_level == "None":
            return "None"
        return f"{self.injury_count} {self.injury_level}"


# -- value pools -------------------------------------------------------------

AIRCRAFT_MODELS = [
    # (model, manufacturer, engines, count at n=100)
    ("Cessna 172S Skyhawk", "Cessna", 1, 18),
    ("Cessna 182T", "Cessna", 1, 8),
    ("Piper PA-28-181 Archer", "Piper", 1, 11),
    ("Piper PA-38-112 Tomahawk", "Piper", 1, 6),
    ("Piper PA-34-200T Seneca", "Piper", 2, 4),
    ("Beechcraft A36 Bonanza", "Beechcraft", 1, 8),
    ("Beechcraft 58 Baron", "Beechcraft", 2, 4),
    ("Cirrus SR22", "Cirrus", 1, 9),
    ("Mooney M20J", "Mooney", 1, 7),
    ("Robinson R44 II", "Robinson", 1, 8),
    ("Bell 206B JetRanger", "Bell", 1, 5),
    ("Diamond DA40 Star", "Diamond", 1, 12),
]

DAMAGE_COUNTS = [("Destroyed", 30), ("Substantial", 64), ("Minor", 4), ("None", 2)]

CAUSE_COUNTS = [
    ("pilot", 30),
    ("engine", 21),
    ("weather", 18),
    ("maintenance", 14),
    ("fuel", 12),
    ("bird", 5),
]

FUEL_SUBTYPES = [("water", 5), ("exhaustion", 7)]

WEATHER_FEATURES = [
    ("gusting crosswinds", 6),
    ("low-visibility fog", 5),
    ("airframe icing", 4),
    ("convective turbulence", 3),
]

INJURY_COUNTS = [("Fatal", 18), ("Serious", 22), ("Minor", 25), ("None", 35)]
CONDITIONS_COUNTS = [("Visual (VMC)", 85), ("Instrument (IMC)", 15)]
LIGHT_COUNTS = [("Day", 70), ("Night", 18), ("Dusk", 7), ("Dawn", 5)]
FLIGHT_UNDER_COUNTS = [
    ("Part 91: General aviation", 78),
    ("Part 135: Air taxi", 12),
    ("Part 137: Agricultural", 8),
    ("Part 121: Air carrier", 2),
]

# (year, month, count): a single July in the window, some 2023 months
MONTH_COUNTS = [
    (2023, 10, 8), (2023, 11, 7), (2023, 12, 7),
    (2024, 1, 8), (2024, 2, 7), (2024, 3, 8), (2024, 4, 8), (2024, 5, 9),
    (2024, 6, 9), (2024, 7, 12), (2024, 8, 9), (2024, 9, 8),
]

STATE_COUNTS = [
    ("Alabama", 2), ("Alaska", 3), ("Arizona", 4), ("Arkansas", 2),
    ("California", 9), ("Colorado", 5), ("Florida", 6), ("Georgia", 2),
    ("Idaho", 2), ("Illinois", 2), ("Indiana", 2), ("Iowa", 2),
    ("Kansas", 2), ("Kentucky", 3), ("Michigan", 4), ("Minnesota", 3),
    ("Missouri", 3), ("Montana", 2), ("Nebraska", 2), ("Nevada", 3),
    ("New York", 4), ("North Carolina", 3), ("Ohio", 4), ("Oklahoma", 2),
    ("Oregon", 3), ("Pennsylvania", 4), ("Tennessee", 3), ("Texas", 8),
    ("Washington", 4), ("Wisconsin", 2),
]

CITIES = {
    "Alabama": "Huntsville", "Alaska": "Palmer", "Arizona": "Prescott", "Arkansas": "Rogers",
    "California": "Fresno", "Colorado": "Greeley", "Florida": "Ocala", "Georgia": "Valdosta",
    "Idaho": "Caldwell", "Illinois": "Peoria", "Indiana": "Muncie", "Iowa": "Ames",
    "Kansas": "Salina", "Kentucky": "Gilbertsville", "Michigan": "Cadillac", "Minnesota": "Brainerd",
    "Missouri": "Sedalia", "Montana": "Kalispell", "Nebraska": "Kearney", "Nevada": "Minden",
    "New York": "Batavia", "North Carolina": "Monroe", "Ohio": "Findlay", "Oklahoma": "Ada",
    "Oregon": "Redmond", "Pennsylvania": "Altoona", "Tennessee": "Tullahoma", "Texas": "Kerrville",
    "Washington": "Arlington", "Wisconsin": "Watertown",
}

REGION_PREFIX = {
    "Alaska": "ANC",
    "California": "WPR", "Washington": "WPR", "Oregon": "WPR", "Nevada": "WPR",
    "Arizona": "WPR", "Idaho": "WPR", "Montana": "WPR", "Colorado": "WPR",
    "Texas": "CEN", "Oklahoma": "CEN", "Kansas": "CEN", "Nebraska": "CEN",
    "Missouri": "CEN", "Iowa": "CEN", "Minnesota": "CEN", "Wisconsin": "CEN",
    "Illinois": "CEN", "Indiana": "CEN", "Michigan": "CEN", "Ohio": "CEN",
    "Arkansas": "CEN",
}

PARTS = ["left wing", "right wing", "landing gear", "propeller", "fuselage", "empennage", "engine mount", "windscreen"]

# Piper parts forced so the mode is unique (landing gear)
PIPER_PART_COUNTS = [("landing gear", 8), ("left wing", 4), ("propeller", 4), ("fuselage", 3), ("empennage", 2)]

ENGINE_COMPONENTS = ["crankshaft", "number two cylinder exhaust valve", "carburetor float", "connecting rod bearing", "left magneto"]
PHASES = ["the landing roll", "takeoff", "a crosswind landing", "a go-around", "final approach", "initial climb"]

OPERATOR_NAMES = [
    "Mercer Aviation LLC", "Bluebird Flight Academy", "Cache Valley Flying Service", "Redline Aero LLC",
    "Stonefield Air Tours", "Prairie Sky Aviation", "Garrison Air Services", "Lakeshore Aviation Inc",
    "Summit Rotor LLC", "Heritage Wings Club", "Private individual", "Crosswind Training Center",
]

AIRPORTS = [
    "Winchester, Virginia (OKV)", "Reno, Nevada (RNO)", "Yelm, Washington (YLM)", "Ada, Oklahoma (ADH)",
    "Fresno, California (FAT)", "Salina, Kansas (SLN)", "Batavia, New York (GVQ)", "Ocala, Florida (OCF)",
    "Greeley, Colorado (GXY)", "Prescott, Arizona (PRC)", "Kerrville, Texas (ERV)", "Brainerd, Minnesota (BRD)",
    "Findlay, Ohio (FDY)", "Monroe, North Carolina (EQY)", "Redmond, Oregon (RDM)", "Tullahoma, Tennessee (THA)",
]

DAMAGE_PHRASES = {
    "Destroyed": "the destruction of the aircraft and substantial damage",
    "Substantial": "substantial damage",
    "Minor": "minor damage",
    "None": "no damage",
}

ENGINE_RUNUP_SENTENCE = "The pilot reported that the engine start, run-up, and takeoff were normal."
WEATHER_CONTRIBUTING_SENTENCE = "Contributing to the accident were the adverse weather conditions present at the time."

# One narrative sentence per cause family, mirroring how report analyses
# describe the event before the formal probable-cause statement.
ANALYSIS_HINTS = {
    "bird": "Shortly after departure, the airplane struck a flock of birds.",
    "engine": "During cruise flight, the engine lost power and the pilot initiated a forced landing.",
    "weather": "Witnesses reported rapidly deteriorating weather conditions in the area.",
    "maintenance": "Maintenance records showed that several required inspections were overdue.",
    "pilot": "Witnesses observed the airplane veer off the runway centerline.",
}

FUEL_ANALYSIS_HINTS = {
    "water": "Post-accident examination revealed water in the fuel system.",
    "exhaustion": "The fuel tanks were found empty at the accident site.",
}


def _expand(counts: list[tuple], n: int) -> list:
    """Expand (value, count-at-100) pairs into exactly n values (largest remainder)."""
    total = sum(c for _, c in counts)
    if n == total:
        return [v for v, c in counts for _ in range(c)]
    exact = [(v, c * n / total) for v, c in counts]
    floored = [(v, int(x)) for v, x in exact]
    remainder = n - sum(c for _, c in floored)
    by_frac = sorted(range(len(exact)), key=lambda i: (-(exact[i][1] - int(exact[i][1])), i))
    out_counts = dict(floored)
    for i in by_frac[:remainder]:
        out_counts[exact[i][0]] += 1
    return [v for v, _ in counts for _ in range(out_counts[v])]


def _cause_sentence(inc: Incident) -> str:
    dmg = f"{DAMAGE_PHRASES[inc.damage]} to the {inc.part}."
    if inc.cause_category == "engine":
        return f"A total loss of engine power resulting from the mechanical failure of the engine's {inc.component}, which resulted in {dmg}"
    if inc.cause_category == "fuel" and inc.cause_subtype == "water":
        return (
            "The pilot's failure to remove all water from the fuel tank, which resulted in fuel contamination, "
            f"a partial loss of engine power, and {dmg}"
        )
    if inc.cause_category == "fuel":
        return (
            "The pilot's inadequate preflight fuel planning, which resulted in a total loss of engine power due to "
            f"fuel exhaustion and {dmg}"
        )
    if inc.cause_category == "weather":
        return f"The pilot's loss of control during an encounter with {inc.weather_feature}, which resulted in {dmg}"
    if inc.cause_category == "maintenance":
        return (
            "The operator's inadequate maintenance and failure to comply with the manufacturer's inspection program, "
            f"which resulted in {dmg}"
        )
    if inc.cause_category == "bird":
        return f"An in-flight collision with a flock of birds during {inc.phase}, which resulted in {dmg}"
    return f"The pilot's failure to maintain directional control during {inc.phase}, which resulted in {dmg}"


def indexed_properties(inc: Incident) -> dict:
    """The property view an ingest-time extraction recovers (ground-truth side)."""
    return {
        "accidentNumber": inc.accident_number,
        "aircraft": inc.aircraft,
        "aircraftManufacturer": inc.manufacturer,
        "aircraftDamage": inc.damage,
        "date": inc.iso_date,
        "dateAndTime": f"{inc.date_human} {inc.time_str}",
        "location": f"{inc.city}, {inc.state}",
        "conditionOfLight": inc.condition_of_light,
        "conditions": inc.conditions,
        "flightConductedUnder": inc.flight_under,
        "highestInjuryLevel": inc.injury_level,
        "injuries": inc.injuries_text,
        "numberOfEngines": inc.engines,
        "operator": inc.operator,
        "registration": inc.registration,
        "departureAirport": inc.departure,
        "destinationAirport": inc.destination,
        "temperatureC": inc.temperature_c,
        "visibilityMiles": inc.visibility_miles,
        "windDirectionDegrees": inc.wind_direction,
        "windSpeedKnots": inc.wind_speed,
    }


def _details_lines(inc: Incident) -> list[tuple[str, str]]:
    props = indexed_properties(inc)
    rendered = {
        "accidentNumber": props["accidentNumber"],
        "dateAndTime": props["dateAndTime"],
        "location": props["location"],
        "aircraft": props["aircraft"],
        "aircraftManufacturer": props["aircraftManufacturer"],
        "aircraftDamage": props["aircraftDamage"],
        "numberOfEngines": str(props["numberOfEngines"]),
        "highestInjuryLevel": props["highestInjuryLevel"],
        "injuries": props["injuries"],
        "flightConductedUnder": props["flightConductedUnder"],
        "conditionOfLight": props["conditionOfLight"],
        "conditions": props["conditions"],
        "departureAirport": props["departureAirport"],
        "destinationAirport": props["destinationAirport"],
        "operator": props["operator"],
        "registration": props["registration"],
        "temperatureC": f"{props['temperatureC']} C",
        "visibilityMiles": f"{props['visibilityMiles']} miles",
        "windDirectionDegrees": f"{props['windDirectionDegrees']} degrees",
        "windSpeedKnots": f"{props['windSpeedKnots']} knots",
    }
    return [(FIELD_LABELS[name], value) for name, value in rendered.items()]


def analysis_text(inc: Incident) -> str:
    sentences = [
        f"On {inc.date_human}, about {inc.time_str} local time, a {inc.aircraft}, {inc.registration}, "
        f"operated by {inc.operator}, was involved in an accident near {inc.city}, {inc.state}.",
        f"The flight departed {inc.departure} and was destined for {inc.destination}.",
    ]
    if inc.mentions_engine_runup:
        sentences.append(ENGINE_RUNUP_SENTENCE)
    if inc.cause_category == "fuel":
        sentences.append(FUEL_ANALYSIS_HINTS[inc.cause_subtype or "exhaustion"])
    else:
        sentences.append(ANALYSIS_HINTS[inc.cause_category])
    sentences.append(
        f"The accident site was located at {inc.latitude} degrees north latitude and "
        f"{inc.longitude_west} degrees west longitude."
    )
    return " ".join(sentences)


def probable_cause_text(inc: Incident) -> str:
    lines = [f"{PROBABLE_CAUSE_LEAD} {_cause_sentence(inc)}"]
    if inc.cause_category == "weather":
        lines.append(WEATHER_CONTRIBUTING_SENTENCE)
    return "\n".join(lines)


def render_docparse_json(inc: Incident, include_disclaimer: bool) -> dict:
    details = _details_lines(inc)
    table_text = "\n".join(f"{label}: {value}" for label, value in details)
    cells = []
    for row, (label, value) in enumerate(details):
        cells.append({"row": row, "col": 0, "row_span": 1, "col_span": 1, "text": label})
        cells.append({"row": row, "col": 1, "row_span": 1, "col_span": 1, "text": value})
    elements = [
        {
            "type": "title",
            "text_representation": "Aviation Investigation Final Report",
            "bbox": [0.1, 0.05, 0.9, 0.1],
            "page_number": 0,
        },
        {
            "type": "page-header",
            "text_representation": f"Accident Number: {inc.accident_number}",
            "bbox": [0.1, 0.0, 0.9, 0.04],
            "page_number": 0,
        },
        {
            "type": "table",
            "text_representation": table_text,
            "bbox": [0.1, 0.12, 0.9, 0.55],
            "page_number": 0,
            "table": {"rows": len(details), "cols": 2, "cells": cells},
        },
        {
            "type": "section-header",
            "text_representation": "Analysis",
            "bbox": [0.1, 0.57, 0.9, 0.6],
            "page_number": 0,
        },
        {
            "type": "text",
            "text_representation": analysis_text(inc),
            "bbox": [0.1, 0.61, 0.9, 0.8],
            "page_number": 0,
        },
        {
            "type": "section-header",
            "text_representation": "Probable Cause and Findings",
            "bbox": [0.1, 0.05, 0.9, 0.09],
            "page_number": 1,
        },
        {
            "type": "text",
            "text_representation": probable_cause_text(inc),
            "bbox": [0.1, 0.1, 0.9, 0.3],
            "page_number": 1,
        },
        {
            "type": "picture",
            "text_representation": f"Figure 1: Wreckage of {inc.registration} at the accident site.",
            "bbox": [0.1, 0.32, 0.9, 0.7],
            "page_number": 1,
            "properties": {"format": "png", "resolution": [640, 480]},
        },
    ]
    if include_disclaimer:
        elements.append(
            {
                "type": "text",
                "text_representation": DISCLAIMER_TEXT,
                "bbox": [0.1, 0.72, 0.9, 0.82],
                "page_number": 1,
            }
        )
    elements.append(
        {
            "type": "page-footer",
            "text_representation": f"Report {inc.accident_number} | National Transportation Safety Board",
            "bbox": [0.1, 0.95, 0.9, 1.0],
            "page_number": 1,
        }
    )
    return {"elements": elements}


# -- generation --------------------------------------------------------------

def _build_incidents(spec: SyntheticCorpusSpec) -> list[Incident]:
    n = spec.n_docs
    if n == 0:
        return []
    rng = Random(spec.seed)

    def shuffled(counts: list[tuple]) -> list:
        values = _expand(counts, n)
        rng.shuffle(values)
        return values

    aircraft = shuffled([((m, mk, e), c) for m, mk, e, c in AIRCRAFT_MODELS])
    damages = shuffled(DAMAGE_COUNTS)
    causes = shuffled(CAUSE_COUNTS)
    months = shuffled([((y, m), c) for y, m, c in MONTH_COUNTS])
    states = shuffled(STATE_COUNTS)
    injuries = shuffled(INJURY_COUNTS)
    conditions = shuffled(CONDITIONS_COUNTS)
    lights = shuffled(LIGHT_COUNTS)
    flight_under = shuffled(FLIGHT_UNDER_COUNTS)
    runup = _expand([(True, 85), (False, 15)], n)
    rng.shuffle(runup)

    fuel_subtypes = _expand(FUEL_SUBTYPES, sum(1 for c in causes if c == "fuel") or 1)
    rng.shuffle(fuel_subtypes)
    weather_features = _expand(WEATHER_FEATURES, sum(1 for c in causes if c == "weather") or 1)
    rng.shuffle(weather_features)

    incidents: list[Incident] = []
    fuel_i = weather_i = 0
    for i in range(n):
        model, maker, engines = aircraft[i]
        cause = causes[i]
        subtype = None
        feature = None
        if cause == "fuel":
            subtype = fuel_subtypes[fuel_i % len(fuel_subtypes)]
            fuel_i += 1
        if cause == "weather":
            feature = weather_features[weather_i % len(weather_features)]
            weather_i += 1
        year, month = months[i]
        state = states[i]
        incidents.append(
            Incident(
                accident_number="",  # assigned after fixups
                aircraft=model,
                manufacturer=maker,
                engines=engines,
                damage=damages[i],
                cause_category=cause,
                cause_subtype=subtype,
                part=rng.choice(PARTS),
                weather_feature=feature,
                phase=rng.choice(PHASES),
                component=rng.choice(ENGINE_COMPONENTS),
                incident_date=date(year, month, rng.randint(1, 28)),
                time_str=f"{rng.randint(6, 21):02d}:{rng.randrange(0, 60, 5):02d}:00",
                city=CITIES[state],
                state=state,
                condition_of_light=lights[i],
                conditions=conditions[i],
                flight_under=flight_under[i],
                injury_level=injuries[i],
                injury_count=rng.randint(1, 4),
                operator=rng.choice(OPERATOR_NAMES),
                registration=f"N{471 + i:03d}{rng.choice('ABCDEFGHJKLMNPRSTUVWXYZ')}{rng.choice('ABCDEFGHJKLMNPRSTUVWXYZ')}",
                temperature_c=round(rng.uniform(-5.0, 38.0), 1),
                visibility_miles=rng.choice([3.0, 5.0, 7.0, 10.0]),
                wind_direction=rng.randrange(0, 360, 10),
                wind_speed=rng.randint(3, 28),
                latitude=round(rng.uniform(25.0, 48.0), 2),
                longitude_west=round(rng.uniform(67.0, 124.0), 2),
                departure=rng.choice(AIRPORTS),
                destination=rng.choice(AIRPORTS),
                mentions_engine_runup=runup[i],
            )
        )

    _apply_fixups(incidents, rng)

    serial = 1
    for inc in incidents:
        prefix = REGION_PREFIX.get(inc.state, "ERA")
        yy = inc.incident_date.year % 100
        inc.accident_number = f"{prefix}{yy:02d}LA{serial:03d}"
        serial += 1
    return incidents


def _apply_fixups(incidents: list[Incident], rng: Random) -> None:
    """Deterministic swaps that preserve global multisets."""
    if not incidents:
        return
    n = len(incidents)
    engine_idx = [i for i, inc in enumerate(incidents) if inc.cause_category == "engine"]
    other_idx = [i for i in range(n) if incidents[i].cause_category != "engine"]

    # engine-cause reports: exactly one Minor, nothing undamaged, rest substantial-or-worse
    def swap_damage(a: int, b: int) -> None:
        incidents[a].damage, incidents[b].damage = incidents[b].damage, incidents[a].damage

    minors = [i for i in engine_idx if incidents[i].damage == "Minor"]
    for i in minors[1:] + [i for i in engine_idx if incidents[i].damage == "None"]:
        partner = next((j for j in other_idx if incidents[j].damage in ("Substantial", "Destroyed")), None)
        if partner is not None:
            swap_damage(i, partner)
            other_idx.remove(partner)
    if engine_idx and not any(incidents[i].damage == "Minor" for i in engine_idx):
        partner = next((j for j in other_idx if incidents[j].damage == "Minor"), None)
        donor = next((i for i in engine_idx if incidents[i].damage in ("Substantial", "Destroyed")), None)
        if partner is not None and donor is not None:
            swap_damage(donor, partner)

    # bird strikes: exactly two in July (single July in the window), rest outside it
    def swap_date(a: int, b: int) -> None:
        incidents[a].incident_date, incidents[b].incident_date = incidents[b].incident_date, incidents[a].incident_date

    bird_idx = [i for i, inc in enumerate(incidents) if inc.cause_category == "bird"]
    july = lambda i: incidents[i].incident_date.month == 7  # noqa: E731
    want_july = bird_idx[:2]
    for i in want_july:
        if not july(i):
            partner = next((j for j in range(n) if j not in bird_idx and july(j)), None)
            if partner is not None:
                swap_date(i, partner)
    for i in bird_idx[2:]:
        if july(i):
            partner = next(
                (j for j in range(n) if j not in bird_idx and not july(j) and incidents[j].incident_date.year == 2024),
                None,
            )
            if partner is not None:
                swap_date(i, partner)

    # at least six Cessna reports dated 2023 (keeps the 2023 filter question non-trivial)
    cessna_idx = [i for i, inc in enumerate(incidents) if inc.manufacturer == "Cessna"]
    if len(cessna_idx) >= 6:
        have = sum(1 for i in cessna_idx if incidents[i].incident_date.year == 2023)
        for i in cessna_idx:
            if have >= 6:
                break
            if incidents[i].incident_date.year == 2023 or july(i):
                continue
            partner = next(
                (
                    j
                    for j in range(n)
                    if incidents[j].manufacturer != "Cessna"
                    and j not in bird_idx
                    and incidents[j].incident_date.year == 2023
                ),
                None,
            )
            if partner is not None:
                swap_date(i, partner)
                have += 1

    # Piper damaged parts drawn from a fixed multiset so the mode is unique
    piper_idx = [i for i, inc in enumerate(incidents) if inc.manufacturer == "Piper"]
    piper_parts = _expand(PIPER_PART_COUNTS, len(piper_idx)) if piper_idx else []
    rng.shuffle(piper_parts)
    for i, part in zip(piper_idx, piper_parts):
        incidents[i].part = part

    # at least two engine-cause reports in California
    engine_ca = [i for i in engine_idx if incidents[i].state == "California"]
    if len(engine_ca) < 2:
        def swap_state(a: int, b: int) -> None:
            incidents[a].state, incidents[b].state = incidents[b].state, incidents[a].state
            incidents[a].city = CITIES[incidents[a].state]
            incidents[b].city = CITIES[incidents[b].state]

        donors = [i for i in engine_idx if incidents[i].state != "California"]
        partners = [j for j in range(n) if incidents[j].cause_category != "engine" and incidents[j].state == "California"]
        for d, p in zip(donors, partners):
            if len([i for i in engine_idx if incidents[i].state == "California"]) >= 2:
                break
            swap_state(d, p)

    # a single, unique maximum wind speed
    top = max(range(n), key=lambda i: (incidents[i].wind_speed, -i))
    incidents[top].wind_speed = 34


def generate(spec: SyntheticCorpusSpec, out_dir: str | Path) -> list[Incident]:
    """Write the corpus (docs/, ground_truth.json, corpus_meta.json); returns incidents."""
    from docflow.bench.questions import ground_truth  # local import: questions imports this module

    out = Path(out_dir)
    docs_dir = out / "docs"
    docs_dir.mkdir(parents=True, exist_ok=True)
    incidents = _build_incidents(spec)
    for inc in incidents:
        payload = render_docparse_json(inc, spec.include_disclaimer)
        (docs_dir / f"{inc.accident_number}.json").write_text(
            json.dumps(payload, indent=2, ensure_ascii=False), encoding="utf-8"
        )
    truth = ground_truth(incidents)
    (out / "ground_truth.json").write_text(json.dumps(truth, indent=2, ensure_ascii=False), encoding="utf-8")
    meta = {
        "spec": spec.to_dict(),
        "n_docs": len(incidents),
        "index_name": BENCH_INDEX,
        "counts": {
            "by_cause": _count_by(incidents, lambda i: i.cause_category),
            "by_damage": _count_by(incidents, lambda i: i.damage),
            "by_state": _count_by(incidents, lambda i: i.state),
        },
    }
    (out / "corpus_meta.json").write_text(json.dumps(meta, indent=2, ensure_ascii=False), encoding="utf-8")
    return incidents


def _count_by(incidents: list[Incident], key) -> dict:
    out: dict = {}
    for inc in incidents:
        out[key(inc)] = out.get(key(inc), 0) + 1
    return dict(sorted(out.items()))

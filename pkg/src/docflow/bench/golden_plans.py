"""Golden logical plans for the benchmark questions.

These are the frozen planner outputs the scripted provider replays. The
recording tool renders them into bench/data/golden_plans/*.json and hashes the
exact planner prompts into bench/data/planner_fixtures.json.
"""

from __future__ import annotations

from docflow.bench.corpus import BENCH_INDEX


def _scan(node_id: str = "scan", filters: list | None = None, description: str = "scan the incident index") -> dict:
    params: dict = {"index": BENCH_INDEX}
    if filters:
        params["filters"] = filters
    return {"id": node_id, "op": "QueryDatabase", "params": params, "inputs": [], "description": description}


def _plan(query: str, nodes: list[dict], result: str) -> dict:
    return {"query": query, "nodes": nodes, "result_node": result}


_SUBSTANTIAL = [{"field": "aircraftDamage", "op": "in", "values": ["Substantial", "Destroyed"]}]

GOLDEN_PLANS: dict[str, dict] = {
    "q01": _plan(
        "How many incidents were there by state?",
        [
            _scan(),
            {
                "id": "by_state",
                "op": "GroupByAggregate",
                "params": {
                    "group_fields": ["us_state"],
                    "aggregation": "count",
                    "field_descriptions": {"us_state": "full name of the US state where the incident occurred"},
                },
                "inputs": ["scan"],
                "description": "count incidents per state (state extracted from the report text)",
            },
        ],
        "by_state",
    ),
    "q02": _plan(
        "What fraction of incidents that resulted in substantial damage were due to engine problems?",
        [
            _scan("damaged", _SUBSTANTIAL, "incidents with substantial or worse damage"),
            {
                "id": "engine_only",
                "op": "LlmFilter",
                "params": {"question": "Was the incident due to engine problems?"},
                "inputs": ["damaged"],
                "description": "keep engine-problem incidents",
            },
            {"id": "numerator", "op": "Count", "params": {}, "inputs": ["engine_only"], "description": "count engine incidents"},
            _scan("damaged_all", _SUBSTANTIAL, "same damaged population for the denominator"),
            {"id": "denominator", "op": "Count", "params": {}, "inputs": ["damaged_all"], "description": "count damaged incidents"},
            {
                "id": "fraction",
                "op": "LlmGenerate",
                "params": {
                    "prompt": "What fraction of incidents that resulted in substantial damage were due to engine problems? "
                    "Divide the first count by the second count and answer with the decimal fraction rounded to three places."
                },
                "inputs": ["numerator", "denominator"],
                "description": "compute numerator / denominator",
            },
        ],
        "fraction",
    ),
    "q03": _plan(
        "In incidents involving Piper aircraft, what was the most commonly damaged part of the aircraft?",
        [
            _scan("piper", [{"field": "aircraftManufacturer", "op": "eq", "value": "Piper"}], "Piper incidents"),
            {
                "id": "parts",
                "op": "LlmExtract",
                "params": {"fields": [{"name": "damaged_part", "dtype": "string", "description": "the aircraft part reported damaged"}]},
                "inputs": ["piper"],
                "description": "extract the damaged part from each report",
            },
            {
                "id": "by_part",
                "op": "GroupByAggregate",
                "params": {"group_fields": ["damaged_part"], "aggregation": "count"},
                "inputs": ["parts"],
                "description": "count incidents per damaged part",
            },
            {"id": "ranked", "op": "Sort", "params": {"field": "count", "descending": True}, "inputs": ["by_part"], "description": "most common first"},
            {"id": "top", "op": "Limit", "params": {"n": 1}, "inputs": ["ranked"], "description": "take the most common part"},
        ],
        "top",
    ),
    "q04": _plan(
        "Which incidents occurred in July involving birds?",
        [
            _scan("july", [{"field": "date", "op": "prefix", "value": "2024-07"}], "incidents in July"),
            {
                "id": "birds",
                "op": "LlmFilter",
                "params": {"question": "Was the incident caused by a collision with birds?"},
                "inputs": ["july"],
                "description": "keep bird-strike incidents",
            },
        ],
        "birds",
    ),
    "q05": _plan(
        "How many incidents were there in Hawaii?",
        [
            _scan(),
            {
                "id": "hawaii",
                "op": "LlmFilter",
                "params": {"question": "Did the incident occur in Hawaii?"},
                "inputs": ["scan"],
                "description": "keep incidents located in Hawaii",
            },
            {"id": "total", "op": "Count", "params": {}, "inputs": ["hawaii"], "description": "count them"},
        ],
        "total",
    ),
    "q06": _plan(
        "How many incidents involved substantial damage?",
        [
            _scan("damaged", _SUBSTANTIAL, "substantial or worse damage"),
            {"id": "total", "op": "Count", "params": {}, "inputs": ["damaged"], "description": "count damaged incidents"},
        ],
        "total",
    ),
    "q07": _plan(
        "How many incidents were due to engine problems?",
        [
            _scan(),
            {
                "id": "engine_only",
                "op": "LlmFilter",
                "params": {"question": "Was the incident due to engine problems?"},
                "inputs": ["scan"],
                "description": "keep engine-problem incidents",
            },
            {"id": "total", "op": "Count", "params": {}, "inputs": ["engine_only"], "description": "count them"},
        ],
        "total",
    ),
    "q08": _plan(
        "How many incidents were there, broken down by number of engines?",
        [
            _scan(),
            {
                "id": "by_engines",
                "op": "GroupByAggregate",
                "params": {"group_fields": ["numberOfEngines"], "aggregation": "count"},
                "inputs": ["scan"],
                "description": "count incidents per engine count",
            },
        ],
        "by_engines",
    ),
    "q09": _plan(
        "What was the breakdown of incidents by aircraft manufacturer?",
        [
            _scan(),
            {
                "id": "by_maker",
                "op": "GroupByAggregate",
                "params": {"group_fields": ["aircraftManufacturer"], "aggregation": "count"},
                "inputs": ["scan"],
                "description": "count incidents per manufacturer",
            },
        ],
        "by_maker",
    ),
    "q10": _plan(
        "How many incidents are in the collection in total?",
        [_scan(), {"id": "total", "op": "Count", "params": {}, "inputs": ["scan"], "description": "count all incidents"}],
        "total",
    ),
    "q11": _plan(
        "How many incidents occurred in 2023?",
        [
            _scan("y2023", [{"field": "date", "op": "prefix", "value": "2023"}], "incidents dated 2023"),
            {"id": "total", "op": "Count", "params": {}, "inputs": ["y2023"], "description": "count them"},
        ],
        "total",
    ),
    "q12": _plan(
        "How many incidents involved Cessna aircraft?",
        [
            _scan("cessna", [{"field": "aircraftManufacturer", "op": "eq", "value": "Cessna"}], "Cessna incidents"),
            {"id": "total", "op": "Count", "params": {}, "inputs": ["cessna"], "description": "count them"},
        ],
        "total",
    ),
    "q13": _plan(
        "Get the latitude and longitude of all incidents in 2023 involving Cessna aircraft",
        [
            _scan(
                "cessna2023",
                [
                    {"field": "date", "op": "prefix", "value": "2023"},
                    {"field": "aircraftManufacturer", "op": "eq", "value": "Cessna"},
                ],
                "Cessna incidents in 2023",
            ),
            {
                "id": "coords",
                "op": "LlmExtract",
                "params": {
                    "fields": [
                        {"name": "latitude", "dtype": "float", "description": "accident site latitude in decimal degrees"},
                        {"name": "longitude", "dtype": "float", "description": "accident site longitude in decimal degrees (negative for west)"},
                    ]
                },
                "inputs": ["cessna2023"],
                "description": "extract coordinates from the report text",
            },
        ],
        "coords",
    ),
    "q14": _plan(
        "How many incidents resulted in fatal injuries?",
        [
            _scan("fatal", [{"field": "highestInjuryLevel", "op": "eq", "value": "Fatal"}], "fatal-injury incidents"),
            {"id": "total", "op": "Count", "params": {}, "inputs": ["fatal"], "description": "count them"},
        ],
        "total",
    ),
    "q15": _plan(
        "Which incidents resulted in the aircraft being destroyed?",
        [_scan("destroyed", [{"field": "aircraftDamage", "op": "eq", "value": "Destroyed"}], "destroyed aircraft")],
        "destroyed",
    ),
    "q16": _plan(
        "What was the highest wind speed recorded in any incident?",
        [
            _scan(),
            {
                "id": "max_wind",
                "op": "GroupByAggregate",
                "params": {"group_fields": [], "aggregation": "max", "agg_field": "windSpeedKnots"},
                "inputs": ["scan"],
                "description": "maximum wind speed over all incidents",
            },
        ],
        "max_wind",
    ),
    "q17": _plan(
        "What was the average temperature in degrees Celsius for incidents in instrument meteorological conditions?",
        [
            _scan("imc", [{"field": "conditions", "op": "eq", "value": "Instrument (IMC)"}], "IMC incidents"),
            {
                "id": "avg_temp",
                "op": "GroupByAggregate",
                "params": {"group_fields": [], "aggregation": "avg", "agg_field": "temperatureC"},
                "inputs": ["imc"],
                "description": "average temperature",
            },
        ],
        "avg_temp",
    ),
    "q18": _plan(
        "How many incidents occurred at night?",
        [
            _scan("night", [{"field": "conditionOfLight", "op": "eq", "value": "Night"}], "night incidents"),
            {"id": "total", "op": "Count", "params": {}, "inputs": ["night"], "description": "count them"},
        ],
        "total",
    ),
    "q19": _plan(
        "How many incidents were weather-related?",
        [
            _scan(),
            {
                "id": "weather",
                "op": "LlmFilter",
                "params": {"question": "Was the incident weather-related?"},
                "inputs": ["scan"],
                "description": "keep weather-related incidents",
            },
            {"id": "total", "op": "Count", "params": {}, "inputs": ["weather"], "description": "count them"},
        ],
        "total",
    ),
    "q20": _plan(
        "Which incidents involved bird strikes?",
        [
            _scan(),
            {
                "id": "birds",
                "op": "LlmFilter",
                "params": {"question": "Did the incident involve a bird strike?"},
                "inputs": ["scan"],
                "description": "keep bird-strike incidents",
            },
        ],
        "birds",
    ),
    "q21": _plan(
        "How many incidents involved agricultural flights?",
        [
            _scan(
                "ag",
                [{"field": "flightConductedUnder", "op": "prefix", "value": "Part 137"}],
                "agricultural flights",
            ),
            {"id": "total", "op": "Count", "params": {}, "inputs": ["ag"], "description": "count them"},
        ],
        "total",
    ),
    "q22": _plan(
        "How many incidents were due to fuel-related problems?",
        [
            _scan(),
            {
                "id": "fuel",
                "op": "LlmFilter",
                "params": {"question": "Was the incident due to fuel-related problems?"},
                "inputs": ["scan"],
                "description": "keep fuel-problem incidents",
            },
            {"id": "total", "op": "Count", "params": {}, "inputs": ["fuel"], "description": "count them"},
        ],
        "total",
    ),
    "q23": _plan(
        "List the incidents in California involving engine problems.",
        [
            _scan(),
            {
                "id": "california",
                "op": "LlmFilter",
                "params": {"question": "Did the incident occur in California?"},
                "inputs": ["scan"],
                "description": "keep California incidents",
            },
            {
                "id": "engine_only",
                "op": "LlmFilter",
                "params": {"question": "Was the incident due to engine problems?"},
                "inputs": ["california"],
                "description": "keep engine-problem incidents",
            },
        ],
        "engine_only",
    ),
    "q24": _plan(
        "How many incidents were there by aircraft damage level?",
        [
            _scan(),
            {
                "id": "by_damage",
                "op": "GroupByAggregate",
                "params": {"group_fields": ["aircraftDamage"], "aggregation": "count"},
                "inputs": ["scan"],
                "description": "count incidents per damage level",
            },
        ],
        "by_damage",
    ),
    "q25": _plan(
        "Summarize the common themes among incidents caused by weather.",
        [
            _scan(),
            {
                "id": "weather",
                "op": "LlmFilter",
                "params": {"question": "Was the incident weather-related?"},
                "inputs": ["scan"],
                "description": "keep weather-related incidents",
            },
            {
                "id": "summary",
                "op": "LlmGenerate",
                "params": {"prompt": "Summarize the common weather themes among these incidents."},
                "inputs": ["weather"],
                "description": "summarize the weather conditions involved",
            },
        ],
        "summary",
    ),
    "q26": _plan(
        "What were the most common categories of probable cause?",
        [
            _scan(),
            {
                "id": "categories",
                "op": "LlmExtract",
                "params": {
                    "fields": [
                        {
                            "name": "cause_category",
                            "dtype": "string",
                            "description": "probable-cause category: engine, weather, fuel, maintenance, bird, or pilot",
                        }
                    ]
                },
                "inputs": ["scan"],
                "description": "categorize each probable cause",
            },
            {
                "id": "by_category",
                "op": "GroupByAggregate",
                "params": {"group_fields": ["cause_category"], "aggregation": "count"},
                "inputs": ["categories"],
                "description": "count incidents per cause category",
            },
        ],
        "by_category",
    ),
    "q27": _plan(
        "What are the three most common aircraft models involved in incidents?",
        [
            _scan(),
            {
                "id": "by_model",
                "op": "GroupByAggregate",
                "params": {"group_fields": ["aircraft"], "aggregation": "count"},
                "inputs": ["scan"],
                "description": "count incidents per model",
            },
            {"id": "ranked", "op": "Sort", "params": {"field": "count", "descending": True}, "inputs": ["by_model"], "description": "most common first"},
            {"id": "top3", "op": "Limit", "params": {"n": 3}, "inputs": ["ranked"], "description": "top three models"},
        ],
        "top3",
    ),
    "q28": _plan(
        "Which incident recorded the highest wind speed?",
        [
            _scan(),
            {"id": "ranked", "op": "Sort", "params": {"field": "windSpeedKnots", "descending": True}, "inputs": ["scan"], "description": "windiest first"},
            {"id": "top", "op": "Limit", "params": {"n": 1}, "inputs": ["ranked"], "description": "take the windiest incident"},
        ],
        "top",
    ),
    "q29": _plan(
        "How many incidents involved water contamination of the fuel?",
        [
            _scan(),
            {
                "id": "water",
                "op": "LlmFilter",
                "params": {"question": "Did the incident involve water contamination of the fuel?"},
                "inputs": ["scan"],
                "description": "keep water-contamination incidents",
            },
            {"id": "total", "op": "Count", "params": {}, "inputs": ["water"], "description": "count them"},
        ],
        "total",
    ),
    "q30": _plan(
        "What about incidents without substantial damage?",
        [
            _scan("undamaged", [{"field": "aircraftDamage", "op": "in", "values": ["Minor", "None"]}], "incidents without substantial damage"),
            {"id": "total", "op": "Count", "params": {}, "inputs": ["undamaged"], "description": "count them"},
        ],
        "total",
    ),
}

# Auxiliary plans: rewrite-rule fixtures and an LlmCluster compile exercise.
AUX_PLANS: dict[str, dict] = {
    "aux_merge_extracts": _plan(
        "Extract the state and damaged part for Piper incidents",
        [
            _scan("piper", [{"field": "aircraftManufacturer", "op": "eq", "value": "Piper"}], "Piper incidents"),
            {
                "id": "extract_state",
                "op": "LlmExtract",
                "params": {"fields": [{"name": "us_state", "dtype": "string", "description": "US state of the incident"}]},
                "inputs": ["piper"],
                "description": "extract the state",
            },
            {
                "id": "extract_part",
                "op": "LlmExtract",
                "params": {"fields": [{"name": "damaged_part", "dtype": "string", "description": "the damaged part"}]},
                "inputs": ["extract_state"],
                "description": "extract the damaged part",
            },
        ],
        "extract_part",
    ),
    "aux_pushdown_filter": _plan(
        "How many destroyed aircraft?",
        [
            _scan(),
            {
                "id": "destroyed",
                "op": "BasicFilter",
                "params": {"expression": {"op": "==", "args": [{"field": "aircraftDamage"}, {"const": "Destroyed"}]}},
                "inputs": ["scan"],
                "description": "keep destroyed aircraft",
            },
            {"id": "total", "op": "Count", "params": {}, "inputs": ["destroyed"], "description": "count them"},
        ],
        "total",
    ),
    "aux_hoist_limit": _plan(
        "State for five incidents",
        [
            _scan(),
            {
                "id": "extract_state",
                "op": "LlmExtract",
                "params": {"fields": [{"name": "us_state", "dtype": "string", "description": "US state of the incident"}]},
                "inputs": ["scan"],
                "description": "extract the state",
            },
            {"id": "first5", "op": "Limit", "params": {"n": 5}, "inputs": ["extract_state"], "description": "first five"},
        ],
        "first5",
    ),
    "aux_noop_filter": _plan(
        "All incidents (with a vacuous filter)",
        [
            _scan(),
            {
                "id": "noop",
                "op": "BasicFilter",
                "params": {"expression": {"const": True}},
                "inputs": ["scan"],
                "description": "vacuous filter",
            },
            {"id": "total", "op": "Count", "params": {}, "inputs": ["noop"], "description": "count all"},
        ],
        "total",
    ),
    "aux_cluster_causes": _plan(
        "Cluster the probable causes into six groups",
        [
            _scan(),
            {
                "id": "causes",
                "op": "LlmExtract",
                "params": {"fields": [{"name": "probable_cause", "dtype": "string", "description": "the probable cause statement"}]},
                "inputs": ["scan"],
                "description": "extract the probable cause",
            },
            {
                "id": "clusters",
                "op": "LlmCluster",
                "params": {"field": "probable_cause", "k": 6},
                "inputs": ["causes"],
                "description": "cluster causes by semantic similarity",
            },
            {
                "id": "sizes",
                "op": "GroupByAggregate",
                "params": {"group_fields": ["cluster_id"], "aggregation": "count"},
                "inputs": ["clusters"],
                "description": "cluster sizes",
            },
        ],
        "sizes",
    ),
}

ALL_PLANS: dict[str, dict] = {**GOLDEN_PLANS, **AUX_PLANS}

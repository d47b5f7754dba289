#!/usr/bin/env python3
"""Writes tests/fixtures/apt29.ndjson.

Target sets inside the study window carry APT29 technique ids and are planted
so that, among incidents that co-target the United Kingdom, the USA is the next
country in 7 of 15 ordered pairs and Germany in 5 of 15.
"""
import datetime as dt
import json
import random
import sys
from pathlib import Path

UK, US, DE, KR, CN, IN, FR = (
    "United Kingdom",
    "United States of America",
    "Germany",
    "Republic of Korea",
    "China",
    "India",
    "France",
)
RAW = {UK: "UK", US: "USA", DE: "Deutschland", KR: "South Korea", CN: "China", IN: "India", FR: "France"}

TECHNIQUES = ["T1059", "T1078", "T1566", "T1195", "T1027"]
MALWARE = ["WellMess"] * 6 + ["WellMail"] * 4 + ["SoreFang"] * 3 + ["Cobalt Strike"] * 2 + ["SUNBURST"]
INDUSTRIES = ["Healthcare"] * 6 + ["Government"] * 5 + ["Research"] * 3 + ["Pharmaceutical"] * 2 + ["Defense"]

STUDY = (
    [[UK, US, DE]] * 3
    + [[UK, US]] * 4
    + [[UK, DE]] * 2
    + [[UK, KR]] * 2
    + [[UK, CN]]
    + [[US, DE]] * 6
    + [[US]] * 3
    + [[DE]] * 2
    + [[IN]] * 2
    + [[IN, KR]]
)

# Outside the window, or inside it without any of the techniques.
NOISE = [
    ([UK, FR], "2019-06-12", ["T1059"]),
    ([UK, FR], "2019-11-03", ["T1566"]),
    ([UK, FR, DE], "2020-05-20", ["T1490"]),
    ([FR], "2020-09-14", []),
    ([UK, CN], "2021-09-01", ["T1078"]),
    ([US, FR], "2020-02-02", ["T1486"]),
]


def main(out: Path) -> None:
    rng = random.Random(29)
    start = dt.date(2020, 1, 6)
    events = []
    for i, countries in enumerate(STUDY):
        day = start + dt.timedelta(days=14 * i + rng.randrange(7))
        techniques = sorted(rng.sample(TECHNIQUES, rng.randint(1, 3)))
        events.append(
            {
                "id": f"apt29-{i + 1:03d}",
                "created_at": day.isoformat(),
                "title": f"APT29 activity report {i + 1}",
                "description": "Campaign attributed to APT29 targeting vaccine research.",
                "countries": countries,
                "raw_country_strings": [RAW[c] for c in countries],
                "adversary": "APT29",
                "malware_families": [MALWARE[i % len(MALWARE)]],
                "industries": [INDUSTRIES[i % len(INDUSTRIES)]],
                "technique_ids": techniques,
                "tags": ["apt29", "covid-19"],
            }
        )
    for j, (countries, day, techniques) in enumerate(NOISE):
        events.append(
            {
                "id": f"noise-{j + 1:03d}",
                "created_at": day,
                "title": f"Unrelated report {j + 1}",
                "description": "",
                "countries": countries,
                "raw_country_strings": [RAW[c] for c in countries],
                "adversary": None,
                "malware_families": ["Emotet"],
                "industries": ["Retail"],
                "technique_ids": techniques,
                "tags": [],
            }
        )
    events.sort(key=lambda e: (e["created_at"], e["id"]))
    with out.open("w", encoding="utf-8") as fh:
        for ev in events:
            fh.write(json.dumps(ev, ensure_ascii=False, separators=(",", ":")) + "\n")


if __name__ == "__main__":
    main(Path(sys.argv[1] if len(sys.argv) > 1 else "tests/fixtures/apt29.ndjson"))

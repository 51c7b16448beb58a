"""Deterministic synthetic discharge cohort for demos and tests.

Real admission exports cannot ship with the repository, so this module
fabricates one with the same shape: 1600 rows, a 16-label disposition
response with a realistic acute-care distribution, gender, and three
bedside scores (age, Braden scale, Hester-Davis fall risk). Row counts
per disposition/gender cell are fixed; score values are drawn from
per-disposition normal profiles, rounded to integers, and clipped to
each score's plausible range, so any seed yields a clinically sensible
file and the same seed yields the same file.
"""

import csv
import json
import os
import random

from .dataset import ColumnSchema, Dataset, Provenance, schema_to_document, validate_schema

DEFAULT_SEED = 2018

REHAB = "Rehab Facility"
SKILLED_NURSING = "Skilled Nursing Facility"

AGE_RANGE = (16, 97)
BRADEN_RANGE = (1, 26)
HESTER_DAVIS_RANGE = (3, 23)

# (disposition, male rows, female rows, missing-gender rows)
_COMPOSITION = (
    ("Another Health Care Institution Not Defined", 2, 0, 0),
    ("Federal Hospital", 4, 0, 0),
    ("Psychiatric Hospital", 5, 0, 0),
    (REHAB, 24, 14, 0),
    ("Short-term General Hospital for Inpatient Care", 4, 2, 0),
    (SKILLED_NURSING, 76, 114, 0),
    ("Swing Bed", 1, 1, 0),
    ("Intermediate Care Facility", 12, 17, 0),
    ("Home Health Care Service", 75, 45, 0),
    ("Long-term Care", 0, 3, 0),
    ("Expired", 13, 8, 0),
    ("Home or Self Care", 499, 552, 0),
    ("Hospice", 7, 5, 1),
    ("Hospice Medical Facility", 11, 6, 0),
    ("Left Against Medical Advice", 10, 3, 0),
    ("Court/Law Enforcement", 1, 0, 0),
)

# disposition -> (age mean, age sd, braden mean, braden sd, hd mean, hd sd)
# Expired rows carry no bedside scores (assessments not charted).
_PROFILES = {
    "Another Health Care Institution Not Defined": (64, 15, 20, 3.0, 7, 2.5),
    "Federal Hospital": (68, 14, 13, 4.0, 12, 3.0),
    "Psychiatric Hospital": (49, 16, 15, 4.0, 9, 3.0),
    REHAB: (62, 13, 19, 3.0, 9, 2.5),
    "Short-term General Hospital for Inpatient Care": (59, 15, 17, 4.0, 9, 3.0),
    SKILLED_NURSING: (74, 14, 14.5, 4.0, 13.5, 3.5),
    "Swing Bed": (92, 3, 15, 4.0, 15, 3.0),
    "Intermediate Care Facility": (73, 13, 15, 4.0, 14, 3.0),
    "Home Health Care Service": (65, 15, 18, 3.5, 9, 3.0),
    "Long-term Care": (79, 9, 15, 4.0, 12, 3.0),
    "Expired": (77, 12, None, None, None, None),
    "Home or Self Care": (57, 17, 20, 3.0, 7, 2.5),
    "Hospice": (72, 13, 18, 3.5, 14, 3.0),
    "Hospice Medical Facility": (79, 10, 16, 4.0, 13, 3.0),
    "Left Against Medical Advice": (51, 14, 19, 3.0, 7, 2.5),
    "Court/Law Enforcement": (40, 12, 15, 4.0, 22, 1.0),
}

# rows whose disposition was never charted, padding the file to 1600
_UNLABELED_ROWS = 85
_UNLABELED_PROFILE = (66, 16, 17, 4.0, 11, 4.0)


def demo_schema():
    """Schema for the bundled demo cohort."""
    return validate_schema([
        ColumnSchema("age", "continuous", plausible_range=AGE_RANGE),
        ColumnSchema("gender", "nominal"),
        ColumnSchema("braden_scale", "continuous", plausible_range=BRADEN_RANGE),
        ColumnSchema("hester_davis", "continuous", plausible_range=HESTER_DAVIS_RANGE),
        ColumnSchema("disposition", "response"),
    ])


def _clipped_int(rng, mean, sd, lo, hi):
    return float(min(hi, max(lo, round(rng.gauss(mean, sd)))))


def _score_triplet(rng, profile):
    age_m, age_sd, br_m, br_sd, hd_m, hd_sd = profile
    age = _clipped_int(rng, age_m, age_sd, *AGE_RANGE)
    if br_m is None:
        return age, None, None
    braden = _clipped_int(rng, br_m, br_sd, *BRADEN_RANGE)
    hd = _clipped_int(rng, hd_m, hd_sd, *HESTER_DAVIS_RANGE)
    return age, braden, hd


def make_demo_dataset(seed=DEFAULT_SEED):
    """Build the 1600-row demo cohort as an in-memory Dataset."""
    rng = random.Random(seed)
    rows = []

    def add(gender, disposition, profile):
        age, braden, hd = _score_triplet(rng, profile)
        rows.append({
            "age": age,
            "gender": gender,
            "braden_scale": braden,
            "hester_davis": hd,
            "disposition": disposition,
        })

    for disposition, males, females, unknowns in _COMPOSITION:
        profile = _PROFILES[disposition]
        for gender, count in (("Male", males), ("Female", females), (None, unknowns)):
            for _ in range(count):
                add(gender, disposition, profile)
    for i in range(_UNLABELED_ROWS):
        gender = None if i % 20 == 0 else ("Male" if i % 2 else "Female")
        add(gender, None, _UNLABELED_PROFILE)
    rng.shuffle(rows)
    return Dataset(demo_schema(), rows, Provenance(f"demo generator (seed={seed})"))


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    return str(value)


def write_demo_files(out_dir, seed=DEFAULT_SEED):
    """Write cohort.csv and schema.json under out_dir; returns their paths."""
    dataset = make_demo_dataset(seed)
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "cohort.csv")
    schema_path = os.path.join(out_dir, "schema.json")
    names = [c.name for c in dataset.schema]
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for row in dataset.rows:
            writer.writerow([_cell(row[n]) for n in names])
    with open(schema_path, "w", encoding="utf-8") as fh:
        json.dump(schema_to_document(dataset.schema), fh, indent=2)
        fh.write("\n")
    return csv_path, schema_path

"""Generators for the packaged datasets.

Each dataset is drawn once from its model with the fixed seed recorded here
and checked into the repository; `python -m superchains.targets.simulate`
rewrites them byte-for-byte.  Tests confirm the shipped files match the
generators.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import irt, pharma

DATA_DIR = Path(__file__).parent / "data"

PK_SEED = 20250301
IRT_SEED = 20250302
CREDIT_SEED = 20250303

EIGHT_SCHOOLS = {
    "y": [28.0, 8.0, -3.0, 7.0, -1.0, 1.0, 18.0, 12.0],
    "sigma": [15.0, 10.0, 16.0, 11.0, 9.0, 11.0, 10.0, 18.0],
}


def write_eight_schools(directory: Path = DATA_DIR) -> Path:
    path = directory / "eight_schools.json"
    path.write_text(json.dumps(EIGHT_SCHOOLS, indent=2) + "\n")
    return path


def write_pk_dataset(directory: Path = DATA_DIR, seed: int = PK_SEED) -> Path:
    rng = np.random.default_rng(seed)
    pop = pharma._PRIOR_MEAN + pharma._PRIOR_SD * rng.standard_normal(5)
    sigma1, sigma2, sigma = np.exp(pop[2]), np.exp(pop[3]), np.exp(pop[4])
    eta1 = rng.standard_normal(pharma.NUM_PATIENTS)
    eta2 = rng.standard_normal(pharma.NUM_PATIENTS)
    k1 = np.exp(pop[0] + eta1 * sigma1)
    k2 = np.exp(pop[1] + eta2 * sigma2)
    central, _, _ = pharma._central_mass_with_partials(k1, k2)
    noise = rng.standard_normal(central.shape)
    y = np.exp(np.log(central) + sigma * noise)
    path = directory / pharma.DATA_FILE
    with open(path, "w", newline="") as fh:
        fh.write("patient,time,dose_event,concentration\n")
        for p in range(pharma.NUM_PATIENTS):
            for w, t0 in enumerate(pharma.DOSE_TIMES):
                for i, off in enumerate(pharma.OBS_OFFSETS):
                    fh.write(f"{p},{float(t0 + off)!r},{w},{float(y[p, w, i])!r}\n")
    return path


def write_irt_dataset(directory: Path = DATA_DIR, seed: int = IRT_SEED) -> Path:
    rng = np.random.default_rng(seed)
    delta = irt.DELTA_PRIOR_MEAN + rng.standard_normal()
    alpha = rng.standard_normal(irt.NUM_STUDENTS)
    beta = rng.standard_normal(irt.NUM_QUESTIONS)
    logits = delta + alpha[:, None] - beta[None, :]
    prob = 1.0 / (1.0 + np.exp(-logits))
    y = (rng.random(logits.shape) < prob).astype(int)
    path = directory / irt.DATA_FILE
    with open(path, "w", newline="") as fh:
        fh.write("student,question,response\n")
        for j in range(irt.NUM_STUDENTS):
            for l in range(irt.NUM_QUESTIONS):
                fh.write(f"{j},{l},{y[j, l]}\n")
    return path


# integer covariate ranges loosely shaped like the classic numeric credit table:
# small categorical codes, a couple of wide monetary/age columns, some binary flags
_CREDIT_RANGES = [
    (1, 4), (4, 72), (0, 4), (1, 10), (250, 18424), (1, 5), (1, 5), (1, 4),
    (1, 4), (1, 3), (1, 4), (1, 4), (19, 75), (1, 3), (1, 3), (1, 4),
    (1, 4), (1, 2), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1), (0, 1),
]


def write_credit_dataset(directory: Path = DATA_DIR, seed: int = CREDIT_SEED, rows: int = 1000) -> Path:
    rng = np.random.default_rng(seed)
    features = np.column_stack(
        [rng.integers(lo, hi + 1, size=rows) for lo, hi in _CREDIT_RANGES]
    ).astype(np.float64)
    standardized = (features - features.mean(axis=0)) / features.std(axis=0)
    design = np.column_stack([standardized, np.ones(rows)])
    theta_true = 0.8 * rng.standard_normal(design.shape[1])
    theta_true[-1] = -1.0  # keep the bad-credit class the minority
    prob = 1.0 / (1.0 + np.exp(-design @ theta_true))
    labels = np.where(rng.random(rows) < prob, 2, 1)
    path = directory / "german_synthetic.data-numeric"
    with open(path, "w") as fh:
        for i in range(rows):
            cells = [f"{int(v):4d}" for v in features[i]] + [f"{labels[i]:4d}"]
            fh.write(" ".join(cells).strip() + "\n")
    return path


def main() -> None:
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    for writer in (write_eight_schools, write_pk_dataset, write_irt_dataset, write_credit_dataset):
        path = writer()
        print(f"wrote {path}")


if __name__ == "__main__":
    main()

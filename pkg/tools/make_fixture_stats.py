"""Build the bundled fixture population statistics file.

The schema condenses a food-risk survey's person descriptors: demographics,
household, practices, knowledge/perception items and weekly contact counts.
Correlations come from a small factor model (so the matrix is positive
semidefinite by construction) and the one-hot profession block gets the
multinomial covariance diag(p) - p p'.  Writes
src/netspread/data/fixture_stats.json.
"""

import os
import sys

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from netspread.population import Field, FeatureSchema, PopulationStats  # noqa: E402

FIELDS = [
    Field("gender", "binary", label="Gender (1 = female)"),
    Field("age_band", "ordinal", label="Age in categories", value_range=(1, 12)),
    Field("education", "ordinal", label="Education level", value_range=(1, 6)),
    Field(
        "profession",
        "categorical",
        label="Profession",
        categories=(
            "agricultural",
            "self_employed",
            "managerial",
            "professional",
            "employee",
            "worker",
            "retired",
            "not_working",
        ),
    ),
    Field("income_band", "ordinal", label="Household income band", value_range=(1, 8)),
    Field("partnered", "binary", label="Lives with a partner"),
    Field("children", "ordinal", label="Number of children", value_range=(0, 4)),
    Field("town_size", "ordinal", label="Size of town of residence", value_range=(1, 8)),
    Field("cooks", "ordinal", label="Personally cooks", value_range=(1, 5)),
    Field("eats_poultry", "ordinal", label="Frequency of eating poultry", value_range=(1, 5)),
    Field(
        "food_risk_knowledge",
        "ordinal",
        label="General knowledge about food risk",
        value_range=(1, 7),
    ),
    Field("prior_awareness", "binary", label="Previous knowledge of the hazard"),
    Field("seeks_info", "binary", label="Looked for extra information"),
    Field("risk_perception", "ordinal", label="Perceived riskiness", value_range=(1, 7)),
    Field("finds_credible", "ordinal", label="Finds the advisory credible", value_range=(1, 7)),
    Field("contact_friends", "ordinal", label="Weekly contacts: friends", value_range=(0, 10)),
    Field(
        "contact_colleagues", "ordinal", label="Weekly contacts: colleagues", value_range=(0, 10)
    ),
    Field("contact_family", "ordinal", label="Weekly contacts: family", value_range=(0, 10)),
    Field(
        "contact_acquaintances",
        "ordinal",
        label="Weekly contacts: acquaintances",
        value_range=(0, 10),
    ),
    Field("internet_use", "ordinal", label="Frequency of internet use", value_range=(1, 5)),
]

# mean and standard deviation per non-categorical field
MOMENTS = {
    "gender": (0.509, 0.4999),
    "age_band": (5.9, 2.4),
    "education": (3.4, 1.15),
    "income_band": (4.2, 1.8),
    "partnered": (0.63, 0.4828),
    "children": (1.1, 1.1),
    "town_size": (4.5, 2.2),
    "cooks": (3.4, 1.2),
    "eats_poultry": (3.1, 1.0),
    "food_risk_knowledge": (4.2, 1.5),
    "prior_awareness": (0.22, 0.4142),
    "seeks_info": (0.35, 0.4770),
    "risk_perception": (4.0, 1.6),
    "finds_credible": (5.2, 1.3),
    "contact_friends": (3.2, 2.4),
    "contact_colleagues": (4.1, 3.0),
    "contact_family": (2.6, 2.0),
    "contact_acquaintances": (2.2, 2.0),
    "internet_use": (4.1, 1.0),
}

PROFESSION_PROBS = np.array([0.005, 0.03, 0.16, 0.23, 0.23, 0.04, 0.15, 0.155])

# factor loadings: sociability, food involvement, socio-economic status
LOADINGS = {
    "gender": (0.0, 0.15, 0.0),
    "age_band": (-0.15, 0.1, -0.2),
    "education": (0.0, 0.0, 0.6),
    "income_band": (0.1, 0.0, 0.55),
    "partnered": (0.2, 0.0, 0.1),
    "children": (0.2, 0.1, 0.0),
    "town_size": (0.0, 0.0, 0.2),
    "cooks": (0.0, 0.5, 0.0),
    "eats_poultry": (0.0, 0.3, 0.0),
    "food_risk_knowledge": (0.0, 0.55, 0.1),
    "prior_awareness": (0.0, 0.35, 0.1),
    "seeks_info": (0.1, 0.3, 0.0),
    "risk_perception": (0.0, 0.35, -0.1),
    "finds_credible": (0.0, 0.3, 0.0),
    "contact_friends": (0.55, 0.0, 0.0),
    "contact_colleagues": (0.5, 0.0, 0.25),
    "contact_family": (0.45, 0.1, -0.1),
    "contact_acquaintances": (0.5, 0.0, 0.0),
    "internet_use": (0.1, 0.0, 0.35),
}


def build_stats() -> PopulationStats:
    schema = FeatureSchema(tuple(FIELDS))
    d = schema.encoded_dim
    mean = np.zeros(d)
    cov = np.zeros((d, d))

    plain = [(f, pos) for f, pos in schema.offsets() if f.kind != "categorical"]
    for f, pos in plain:
        mean[pos] = MOMENTS[f.id][0]
    for f, pos in schema.offsets():
        if f.kind == "categorical":
            mean[pos : pos + f.width] = PROFESSION_PROBS
            block = np.diag(PROFESSION_PROBS) - np.outer(PROFESSION_PROBS, PROFESSION_PROBS)
            cov[pos : pos + f.width, pos : pos + f.width] = block

    loadings = np.array([LOADINGS[f.id] for f, _ in plain])
    residual = 1.0 - np.sum(loadings**2, axis=1)
    assert residual.min() > 0.05, "factor loadings leave no residual variance"
    corr = loadings @ loadings.T + np.diag(residual)
    sds = np.array([MOMENTS[f.id][1] for f, _ in plain])
    block = corr * np.outer(sds, sds)
    idx = np.array([pos for _, pos in plain])
    cov[np.ix_(idx, idx)] = block

    return PopulationStats(schema=schema, mean=mean, covariance=cov)


def main() -> None:
    stats = build_stats()
    np.linalg.cholesky(stats.covariance + 1e-9 * np.eye(len(stats.mean)))
    out = os.path.join(
        os.path.dirname(__file__), "..", "src", "netspread", "data", "fixture_stats.json"
    )
    os.makedirs(os.path.dirname(out), exist_ok=True)
    stats.to_json(out)
    print(f"wrote {os.path.normpath(out)} (dim {stats.schema.encoded_dim})")


if __name__ == "__main__":
    main()

"""Build a labeled pair dataset from a small synthetic survey.

Egos report some receivers (partially observed: gender, age band,
education, profession) which are completed from the responding-contact
pool; non-receivers are generated from the ego pool with a 70% homophile
share and counted from the weekly-contact fields.
"""

import numpy as np

from netspread.completion import build_training_set, homophile_split, write_pairs_csv
from netspread.experiments import load_stats
from netspread.population import sample_population

stats = load_stats("builtin")
rng = np.random.default_rng(3)

egos = list(sample_population(stats, 200, rng).rows())
responders = list(sample_population(stats, 80, rng).rows())

criteria = ("gender", "age_band", "education", "income_band")
similar, other = homophile_split(egos[0], egos, criteria)
print(f"ego 0 homophiles on {criteria}: {len(similar)} of {len(egos) - 1}")

# each of the first 50 egos reported one receiver (observed demographics only)
observed = ("gender", "age_band", "education", "profession")
listed = [[] for _ in egos]
for i in range(50):
    donor = responders[int(rng.integers(len(responders)))]
    listed[i] = [{k: donor[k] for k in observed}]

pairs = build_training_set(
    egos,
    listed,
    responders,
    criteria=("gender", "age_band"),
    contact_fields=("contact_friends", "contact_colleagues",
                    "contact_family", "contact_acquaintances"),
    h=0.7,
    rng=rng,
)
n_pos = sum(1 for p in pairs if p.label == 1)
print(f"built {len(pairs)} pairs: {n_pos} positive, {len(pairs) - n_pos} negative")
print(f"positive fraction: {n_pos / len(pairs):.3f}")

write_pairs_csv(pairs, stats.schema, "pairs.csv")
print("wrote pairs.csv")

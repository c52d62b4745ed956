# %% [markdown]
# # Markov chains across Dirichlet magnitudes
#
# Three chains over four tokens, transition rows drawn from a symmetric
# Dirichlet. Small magnitudes give very different chains and the minimax
# mixture pays off; large magnitudes make every chain nearly uniform and
# balanced weights are already close to optimal.

# %%
import numpy as np

from mixmax.experiments import ExperimentConfig, run_rows

cfg = ExperimentConfig.from_dict(
    {"experiment": "markov_magnitudes", "trials": 5, "methods": ["mixmax", "e2mixmax:data_reuse"]}
)
rows = run_rows(cfg, workers=4)

# %%
for label, _ in cfg.settings():
    worst = {}
    for method in ("mixmax", "e2mixmax:data_reuse", "balanced"):
        worst[method] = np.mean([r["worst_group_loss"] for r in rows if r["setting"] == label and r["method"] == method])
    gain = worst["balanced"] - worst["mixmax"]
    print(f"{label:15s} worst-group CE  mixmax {worst['mixmax']:.4f}  "
          f"reuse {worst['e2mixmax:data_reuse']:.4f}  balanced {worst['balanced']:.4f}  gain {gain:.4f}")

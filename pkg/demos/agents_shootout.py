"""Desk-scale comparison: learned policies vs fixed selection baselines.

Trains a tabular agent for a few seconds, then rolls the greedy policy
against the nearest-BS and max-rate baselines on the identical seeded
evaluation environments. The same thing is available
from the command line:

    vnetsim sweep --agent tabular --axis none --seeds 0,1 --out out/tab

Run: python demos/agents_shootout.py
"""

import math
import tempfile

from vnetsim.config import ScenarioConfig
from vnetsim.harness import run_sweep

PRESET = dict(axis="none", seeds=(0, 1), workers=2, episodes=60, horizon=40,
              eval_episodes=10, corridor_len_m=800.0, eps_decay=0.95)

results = {}
for agent in ("tabular", "nearest_bs", "max_rate"):
    out = tempfile.mkdtemp(prefix=f"shootout_{agent}_")
    rows = run_sweep(ScenarioConfig(agent=agent, out_dir=out, **PRESET))
    results[agent] = {
        "tq": sum(r["mean_tq"] for r in rows) / len(rows),
        "handoff": sum(r["handoff_prob"] for r in rows) / len(rows),
        "coll": sum(r["collision_rate"] for r in rows) / len(rows),
        "out": out,
    }

print(f"\n{'agent':>12} {'t_q [Mb/s]':>12} {'handoff':>9} {'collision':>10}")
for agent, m in sorted(results.items(), key=lambda kv: -kv[1]["tq"]):
    print(f"{agent:>12} {m['tq']/1e6:12.1f} {m['handoff']:9.3f} {m['coll']:10.4f}")

best = max(results, key=lambda a: results[a]["tq"])
print(f"\n{best} leads on handoff-aware rate at this tiny budget; "
      "the acceptance presets in tests/test_acceptance.py run the "
      "full-length version with the deep net in the mix.")
print("artifacts (summary.csv, episode logs, tables):")
for agent, m in results.items():
    print(f"  {agent:>12}: {m['out']}")

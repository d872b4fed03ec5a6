"""Measuring utility: average query error of the three grid methods.

Runs the benchmark harness the same way the CLI does: every method is scored
on the identical per-repetition query workload, and errors are averaged with
a denominator floored at 2% of the population so empty queries don't blow up
the metric. Also sketches the uniform grid's U-shaped sensitivity to N.
"""

from ldpgrid import DatasetSpec, SyntheticSource, UNIT_SQUARE, synth_clustered
from ldpgrid.bench import ExperimentConfig, run_comparison, run_uniform_sweep, summarize

N_USERS = 200_000
spec = DatasetSpec("demo", UNIT_SQUARE, SyntheticSource("clustered", N_USERS, 99))
users = synth_clustered(N_USERS, seed=99)

print("method comparison, eps=1, 3 repetitions, shared workloads:")
config = ExperimentConfig(
    dataset=spec,
    methods=("ug", "privag", "aag"),
    epsilons=(1.0,),
    rhos=(0.001, 0.01),
    reps=3,
    gamma=300,
    master_seed=4,
)
rows, meta = run_comparison(config, dataset=users)
print(f"(uniform grid size picked on a holdout: {meta['ug_n_per_epsilon']})")
for entry in summarize(rows):
    n_note = f" N={entry['N']}" if entry["N"] else ""
    print(f"  {entry['method']:7s} rho={entry['rho']:<6}{n_note:6s} mean AQE {entry['mean_aqe']:.4f}")

print("\nuniform grid size sweep (too coarse and too fine both hurt):")
sweep = ExperimentConfig(
    dataset=spec,
    methods=("ug",),
    epsilons=(1.0,),
    rhos=(0.01,),
    reps=3,
    gamma=300,
    ug_sizes=(2, 5, 10, 20, 35, 50),
    master_seed=4,
)
rows, _ = run_uniform_sweep(sweep, dataset=users)
for entry in summarize(rows):
    bar = "#" * int(entry["mean_aqe"] * 60)
    print(f"  N={entry['N']:3d}  AQE {entry['mean_aqe']:.4f}  {bar}")

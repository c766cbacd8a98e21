"""Random hyperparameter search over Monte Carlo partitions.

Each trial samples one configuration from the canonical search sets,
trains it once per partition, and is ranked by mean validation
accuracy. The whole search is reproducible from the single seed.
"""

from wingfuse import SearchSpace, build_class_matrix, random_search, synth_dataset

ds = synth_dataset(seed=5, classes=4, per_class=40, dim=16, shift=0.0)
centroids = build_class_matrix(ds.pack, beta=1.0)

space = SearchSpace()
print("search sets:")
print("  batch sizes   ", space.batch_sizes)
print("  hidden dims   ", space.hidden_dims)
print("  learning rates", space.learning_rates)
print("  momenta       ", space.momenta)
print("  epochs        ", space.epoch_range, "(uniform integer)")
print("  temperatures  ", space.taus)
print("  fusion weights", space.alphas)
print()

results = random_search(
    space, trials=10, partitions=3,
    images=ds.train.images, captions=ds.train.captions,
    labels=list(ds.train.manifest.labels), centroids=centroids,
    search_seed=2024,
)

print(f"{'rank':>4}  {'mean acc':>8}  {'std':>6}  config")
for rank, r in enumerate(results, start=1):
    c = r.config
    print(f"{rank:4d}  {r.mean_val_accuracy:8.3f}  {r.std_val_accuracy:6.3f}  "
          f"lr={c.learning_rate} m={c.momentum} b={c.batch_size} h={c.hidden_dim} "
          f"e={c.epochs} tau={c.tau} alpha={c.alpha}")

"""Sweep the fusion weight, the blend weight, and the description count.

One trained head is reused across every grid point: the fusion weight
enters only at scoring time, and the text-side knobs only change the
class centroids.
"""

from wingfuse import TrainConfig, build_class_matrix, synth_dataset, train
from wingfuse.evaluator import EvalSplit, sweep
from wingfuse.trainer import monte_carlo_partition

ds = synth_dataset(seed=1, classes=4, per_class=40, dim=16, shift=0.5)
centroids = build_class_matrix(ds.pack, beta=1.0)

train_ids, val_ids = monte_carlo_partition(ds.train.manifest, seed=42, val_fraction=0.1)
row_of = {s: i for i, s in enumerate(ds.train.images.ids)}
tr = [row_of[i] for i in train_ids]
va = [row_of[i] for i in val_ids]
labels = list(ds.train.manifest.labels)
report = train(
    ds.train.images.take(tr), ds.train.captions.take(tr), [labels[i] for i in tr],
    centroids,
    ds.train.images.take(va), ds.train.captions.take(va), [labels[i] for i in va],
    TrainConfig(batch_size=32, epochs=40, seed=1),
)

split = EvalSplit(
    "test", ds.test.images, ds.test.captions, tuple(ds.test.manifest.labels)
)

print("fusion weight (0 = caption branch only, 1 = image branch only)")
for row in sweep("alpha", [i / 10 for i in range(11)], report.params, [split],
                 alpha=0.5, centroids=centroids):
    print(f"  alpha={row.value:4.1f}  accuracy={row.accuracy:.3f}  macro_f1={row.macro_f1:.3f}")

print("\nblend weight (0 = template centroids, 1 = generated-description centroids)")
for row in sweep("beta", [0.0, 0.25, 0.5, 0.75, 1.0], report.params, [split],
                 alpha=0.5, pack=ds.pack):
    print(f"  beta={row.value:5.2f}  accuracy={row.accuracy:.3f}")

print("\ndescriptions per class (centroids over the first m rows)")
for row in sweep("mc", [1, 2, 4, 8, 12], report.params, [split],
                 alpha=0.5, pack=ds.pack):
    print(f"  m={row.value:4.0f}  accuracy={row.accuracy:.3f}")

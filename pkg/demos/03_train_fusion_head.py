"""Train the fusion head end to end on synthetic data.

Shows the loss/accuracy trajectory, early stopping, and the effect of
fusing the frozen image scores with the trained caption scores.
"""

import numpy as np

from wingfuse import (
    TrainConfig,
    build_class_matrix,
    cosine_matrix,
    evaluate,
    monte_carlo_partition,
    predict,
    synth_dataset,
    train,
)

ds = synth_dataset(seed=0, classes=4, per_class=50, dim=16, shift=0.5)
centroids = build_class_matrix(ds.pack, beta=1.0)

train_ids, val_ids = monte_carlo_partition(ds.train.manifest, seed=42, val_fraction=0.1)
row_of = {s: i for i, s in enumerate(ds.train.images.ids)}
tr = [row_of[i] for i in train_ids]
va = [row_of[i] for i in val_ids]
labels = list(ds.train.manifest.labels)

config = TrainConfig(batch_size=32, epochs=50, seed=0)
report = train(
    ds.train.images.take(tr), ds.train.captions.take(tr), [labels[i] for i in tr],
    centroids,
    ds.train.images.take(va), ds.train.captions.take(va), [labels[i] for i in va],
    config,
)

print("epoch  train loss  val accuracy")
for epoch, (loss, acc) in enumerate(zip(report.train_loss, report.val_accuracy)):
    marker = "  <- best" if epoch == report.best_epoch else ""
    print(f"{epoch:5d}  {loss:10.4f}  {acc:12.3f}{marker}")
print(f"stopping reason: {report.stopping_reason}")

result = evaluate(
    report.params, config.alpha, ds.test.images, ds.test.captions, centroids,
    list(ds.test.manifest.labels),
)
truth = np.array([centroids.classes.index(l) for l in ds.test.manifest.labels])
image_only = (predict(cosine_matrix(ds.test.images.data, centroids.matrix)) == truth).mean()

print()
print(f"shifted test set: fused accuracy {result.accuracy:.3f} "
      f"(macro-F1 {result.macro_f1:.3f}) vs image-only {image_only:.3f}")

#!/usr/bin/env python3
"""Reference COCO-style AP on a tiny instance.

One ground-truth mask of 10 pixels. Prediction A covers 9 of them (IoU 0.9,
score 0.9); prediction B overlaps 2 of them and adds 8 pixels elsewhere
(IoU 2/18, score 0.8). Prints AP per threshold and the mean.
"""


def iou(a, b):
    inter = len(a & b)
    union = len(a | b)
    return 1.0 if union == 0 else inter / union


def ap_at(preds, gts, t):
    order = sorted(range(len(preds)), key=lambda i: -preds[i][1])
    taken = set()
    tp = []
    for i in order:
        mask = preds[i][0]
        best, best_j = -1.0, None
        for j, g in enumerate(gts):
            if j in taken:
                continue
            v = iou(mask, g)
            if v >= t and v > best:
                best, best_j = v, j
        if best_j is None:
            tp.append(0)
        else:
            taken.add(best_j)
            tp.append(1)
    precisions, recalls = [], []
    ctp = 0
    for n, hit in enumerate(tp, start=1):
        ctp += hit
        precisions.append(ctp / n)
        recalls.append(ctp / len(gts))
    for i in range(len(precisions) - 2, -1, -1):
        precisions[i] = max(precisions[i], precisions[i + 1])
    total = 0.0
    for k in range(101):
        r = k / 100
        p = 0.0
        for pi, ri in zip(precisions, recalls):
            if ri >= r:
                p = pi
                break
        total += p
    return total / 101


gt = {(x, 0) for x in range(10)}
pred_a = {(x, 0) for x in range(9)}
pred_b = {(0, 0), (1, 0)} | {(x, 5) for x in range(8)}
preds = [(pred_a, 0.9), (pred_b, 0.8)]
thresholds = [(50 + 5 * i) / 100 for i in range(10)]
aps = [ap_at(preds, [gt], t) for t in thresholds]
for t, a in zip(thresholds, aps):
    print(f"AP@{t:.2f} = {a:.12f}")
print(f"mAP = {sum(aps) / len(aps):.12f}")

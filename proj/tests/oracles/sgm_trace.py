#!/usr/bin/env python3
"""Single-direction scanline recurrence on a 1x5 row with 3 disparities.

L(p, d) = C(p, d) + min(L(p-1, d), L(p-1, d+-1) + P1, min_k L(p-1, k) + P2)
          - min_k L(p-1, k), with L(0, d) = C(0, d).
Also enumerates every labelling to find the minimum of the 1-D energy.
"""
import itertools

C = [
    [4.0, 1.0, 6.0],
    [5.0, 3.0, 0.0],
    [2.0, 7.0, 1.0],
    [0.0, 4.0, 9.0],
    [3.0, 2.0, 8.0],
]
P1, P2 = 2.0, 5.0
D = 3

L = [C[0][:]]
for p in range(1, len(C)):
    prev = L[-1]
    m = min(prev)
    row = []
    for d in range(D):
        cand = [prev[d], m + P2]
        if d > 0:
            cand.append(prev[d - 1] + P1)
        if d < D - 1:
            cand.append(prev[d + 1] + P1)
        row.append(C[p][d] + min(cand) - m)
    L.append(row)
for p, row in enumerate(L):
    print(f"L[{p}] = {row}")


def rho(a, b):
    return 0.0 if a == b else (P1 if abs(a - b) == 1 else P2)


best = None
for labels in itertools.product(range(D), repeat=len(C)):
    e = sum(C[p][labels[p]] for p in range(len(C)))
    e += sum(rho(labels[p], labels[p + 1]) for p in range(len(C) - 1))
    if best is None or e < best[0]:
        best = (e, labels)
print(f"min energy {best[0]} labels {best[1]}")

"""Reference values for the SE(2) exponential via RK4 matrix-ODE integration.

Integrates M'(t) = M(t) * xi from M(0) = I with xi the twist matrix of
(vx, vy, w), which avoids the closed-form V-matrix entirely. Used to freeze
expected values in the C++ unit tests.
"""

import math


def mat_mul(a, b):
    return [
        [sum(a[i][k] * b[k][j] for k in range(3)) for j in range(3)]
        for i in range(3)
    ]


def mat_add(a, b):
    return [[a[i][j] + b[i][j] for j in range(3)] for i in range(3)]


def mat_scale(a, s):
    return [[a[i][j] * s for j in range(3)] for i in range(3)]


def twist(vx, vy, w):
    return [[0.0, -w, vx], [w, 0.0, vy], [0.0, 0.0, 0.0]]


def rk4_exp(vx, vy, w, steps=200000):
    xi = twist(vx, vy, w)
    m = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    h = 1.0 / steps
    for _ in range(steps):
        k1 = mat_mul(m, xi)
        k2 = mat_mul(mat_add(m, mat_scale(k1, h / 2)), xi)
        k3 = mat_mul(mat_add(m, mat_scale(k2, h / 2)), xi)
        k4 = mat_mul(mat_add(m, mat_scale(k3, h)), xi)
        incr = mat_add(mat_add(k1, mat_scale(k2, 2)), mat_add(mat_scale(k3, 2), k4))
        m = mat_add(m, mat_scale(incr, h / 6))
    theta = math.atan2(m[1][0], m[0][0])
    return m[0][2], m[1][2], theta


def report(tag, vx, vy, w):
    x, y, theta = rk4_exp(vx, vy, w)
    print(f"{tag}: tau=({vx!r}, {vy!r}, {w!r})")
    print(f"  x     = {x:.17g}")
    print(f"  y     = {y:.17g}")
    print(f"  theta = {theta:.17g}")


if __name__ == "__main__":
    report("axis quarter turn", 1.0, 0.0, math.pi / 2)
    print(f"  (analytic 2/pi = {2.0 / math.pi:.17g})")
    report("generic A", 0.3, -0.2, 0.5)
    report("generic B", -1.1, 0.7, -2.4)
    report("pure rotation", 0.0, 0.0, 1.0)
    report("pure translation", 0.25, -0.75, 0.0)

"""Closed-form oracle for the single-pose two-anchor estimation problem.

With one pose, two absolute anchors z1/z2 in separate noise classes, and all
headings zero, each coordinate solves independently as an inverse-variance
weighted mean:

    xhat_k = (z1_k / a_k + z2_k / b_k) / (1 / a_k + 1 / b_k)

with analytic sensitivities

    d xhat_k / d a_k = b_k (z2_k - z1_k) / (a_k + b_k)^2
    d xhat_k / d b_k = a_k (z1_k - z2_k) / (a_k + b_k)^2

Used to freeze expected estimates and Jacobian entries in the C++ tests.
"""

Z1 = (0.004, -0.003, 0.002)
Z2 = (-0.002, 0.005, -0.004)
A = (0.2, 0.5, 0.9)
B = (0.7, 0.3, 0.4)


def main():
    print("estimate:")
    for k in range(3):
        xhat = (Z1[k] / A[k] + Z2[k] / B[k]) / (1.0 / A[k] + 1.0 / B[k])
        print(f"  xhat[{k}] = {xhat:.17g}")
    print("d xhat / d a:")
    for k in range(3):
        d = B[k] * (Z2[k] - Z1[k]) / (A[k] + B[k]) ** 2
        print(f"  S[{k}][a_{k}] = {d:.17g}")
    print("d xhat / d b:")
    for k in range(3):
        d = A[k] * (Z1[k] - Z2[k]) / (A[k] + B[k]) ** 2
        print(f"  S[{k}][b_{k}] = {d:.17g}")


if __name__ == "__main__":
    main()

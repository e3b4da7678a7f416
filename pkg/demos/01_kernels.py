"""ANOVA and homogeneous polynomial kernels, three ways each."""

import numpy as np

from polyfm import kernels, oracle

rng = np.random.default_rng(0)
p = rng.normal(size=6)
x = rng.normal(size=6)

# The ANOVA kernel sums products over distinct features only.
print("A^2 power sums :", kernels.anova_fast(p, x, 2))
print("A^2 recursion  :", kernels.anova_recursive(p, x, 2))
print("A^2 enumeration:", oracle.brute_anova(p, x, 2))

# Higher degrees go through the dynamic program.
for m in range(1, 7):
    print(f"A^{m} = {kernels.anova_recursive(p, x, m):+.6f}")
print("A^7 on 6 features is empty:", kernels.anova_recursive(p, x, 7))

# The homogeneous kernel keeps repeated features: <p, x>^m.
print("H^3 closed form:", kernels.homogeneous(p, x, 3))
print("H^3 enumeration:", oracle.brute_homogeneous(p, x, 3))

# Both are homogeneous of degree m in p.
lhs, rhs = kernels.homogeneity_check(p, x, 3, -2.0, "anova")
print("A^3(-2p, x) vs -8 A^3(p, x):", lhs, rhs)

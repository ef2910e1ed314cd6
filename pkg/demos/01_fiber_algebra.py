"""Structures on V ⊕ V* for a plane V, and the pair built from two of them."""

import numpy as np

from gktwist import gcalg

np.set_printoptions(precision=4, suppress=True)

# points of the two-sheeted hyperboloid parametrize both families
x = gcalg.Hyper3.from_chart(0.5, -1.0)
y = gcalg.Hyper3.from_chart(0.0, np.sqrt(3.0))
I = gcalg.structure_plus(x)
J = gcalg.structure_minus(y)
print("I =\n", I)
print("J =\n", J)
print("I^2 + 1:", np.abs(I @ I + np.eye(4)).max())
print("[I, J]:", np.abs(I @ J - J @ I).max())
print("orientation classes:", gcalg.orientation_class(I), gcalg.orientation_class(J))

# complex and symplectic data land in opposite classes
K = np.array([[0.0, -1.0], [1.0, 0.0]])
print("from complex:", gcalg.orientation_class(gcalg.from_complex(K)))
print("from symplectic:", gcalg.orientation_class(gcalg.from_symplectic(1.0)))

# B-transforms keep the class
print("B-transformed J:", gcalg.orientation_class(gcalg.b_transform(J, 2.5)))

# positivity of <IA, JA> is decided by the sheets alone
for s in (1, -1):
    Js = gcalg.structure_minus(gcalg.Hyper3.from_chart(0.3, 0.2, sheet=s))
    eig = np.linalg.eigvalsh(gcalg.positivity_gram(I, Js))
    print(f"sheet {s:+d}: positive={gcalg.positivity(I, Js)}, eigenvalues {eig}")

# the orbit through I is a Kähler surface: metric h and complex structure K on T_I
fg = gcalg.fiber_geometry(I)
print("h on T_I =\n", fg.h)
print("K on T_I =\n", fg.kappa)

pair = gcalg.gks_fiber_pair(I, J)
A, B, G = pair.cal_i, pair.cal_j, pair.pairing
print("fiber pair: A^2+1", np.abs(A @ A + np.eye(8)).max(),
      " [A,B]", np.abs(A @ B - B @ A).max(),
      " min eig <AW,BW>", np.linalg.eigvalsh(0.5 * (A.T @ G @ B + B.T @ G @ A)).min())

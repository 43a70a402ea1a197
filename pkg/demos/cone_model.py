# %% [markdown]
# # The future lightlike cone as a Cartan geometry
#
# The cone of future null vectors in Minkowski space carries a degenerate
# metric h and the position vector field Z.  Pulling back the Levi-Civita
# connection form along null frames gives a Moebius-algebra valued form on
# the bundle of admissible frames.  Here we check that this form is a flat
# Cartan connection and that it hands back (h, Z).

# %%
import numpy as np

from llcartan.cartan import (
    PullbackConnection,
    cartan_rank_test,
    expansion,
    extract_z_omega,
    flatness_diagnostics,
    h_omega_matrix,
)
from llcartan.immersions import minkowski_cone_immersion
from llcartan.mobius import random_h

m = 3
rng = np.random.default_rng(0)
imm = minkowski_cone_immersion(m)
conn = PullbackConnection(imm)

# %% [markdown]
# The expansion lambda (with nabla_Z Z = lambda Z) is one for the position field.

# %%
pts = imm.chart.sample_points(5, rng)
print("lambda:", [round(expansion(imm, y), 12) for y in pts])

# %% [markdown]
# At random admissible frames the connection matrix is invertible, and the
# metric and field it induces agree with the originals.

# %%
for y in pts:
    b = conn.frame(y, random_h(rng, m))
    v = cartan_rank_test(conn, b)
    h_err = np.abs(h_omega_matrix(conn, b) - imm.chart.full_metric(y)).max()
    z_err = np.abs(extract_z_omega(conn, y, b) - np.eye(m + 1)[0]).max()
    print(f"cond={v.condition:9.3e}  |h - h_omega|={h_err:.1e}  |Z - Z_omega|={z_err:.1e}")

# %% [markdown]
# Doubling Z doubles the expansion; the induced metric becomes 4h.

# %%
imm2 = minkowski_cone_immersion(m, tau=2.0)
conn2 = PullbackConnection(imm2)
y = pts[0]
print("ratio h_omega/h:", h_omega_matrix(conn2, conn2.frame(y))[1, 1] / imm2.chart.full_metric(y)[1, 1])

# %% [markdown]
# The curvature function vanishes: the cone is the flat model.

# %%
print(flatness_diagnostics(conn, 3, 1))

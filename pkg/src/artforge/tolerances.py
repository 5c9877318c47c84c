"""Repo-wide tolerance ladder.

Each decade separates numerical noise from the next kind of decision.
"""

EPS_HERM = 1e-12       # Hermiticity of constructed matrices
EPS_TRACE = 1e-10      # unit trace of density matrices
EPS_PSD = 1e-9         # cone membership
EPS_FEAS = 1e-7        # linear constraint residuals
EPS_CERT = 1e-8        # Farkas certificate margin
EPS_DECISION = 1e-6    # verdicts surfaced to users
EPS_RANK = 1e-9        # residual norm below which a spanning element is dropped

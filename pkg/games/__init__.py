"""
Games package: kin selection in symmetric 2x2 games.
- game_core: payoff matrices, decomposition, taxonomy
- analytics: thresholds and equilibria in closed form
- dynamics: replicator flows, fixed points, basins
- abm: Monte Carlo oracle and finite-population evolution
"""

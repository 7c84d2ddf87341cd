"""Q-SVRG solvers, stochastic Hessian oracles and a convergence benchmark harness."""

__version__ = "0.1.0"

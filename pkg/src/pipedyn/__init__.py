"""pipedyn: analytic transient-flow solutions, emergency dispatch and
reconstruction optimizers for complex gas pipelines."""

__version__ = "0.1.0"

"""Two-habitat transmission problems for generalized diffusion equations."""

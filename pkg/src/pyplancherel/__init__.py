"""Plancherel-type random partitions, their kernels and limit theorems."""

from pyplancherel.core import io, kernels, lattice, limits


def main():
    window = lattice.span(0, 10)
    with open("hermite_s0.csv", "w", encoding="utf-8") as f:
        f.write(io.kernel_to_csv(kernels.hermite_kernel(0.0), window))

    with open("omega.csv", "w", encoding="utf-8") as f:
        f.write(io.curve_to_csv(limits.omega_curve()))

    print("Sweeping Charlier kernels towards the discrete Hermite kernel...")
    report = limits.charlier_edge_sweep(0.0, limits.DEFAULT_EDGE_GRID, window)
    for N, distance in report.entries:
        print(f"N={N:_} distance={distance:.3e}")
    print(f"Done. Passed={report.passed}, Decreasing={report.decreasing}")
    with open("edge_sweep.json", "w", encoding="utf-8") as f:
        f.write(io.report_to_json(report))


if __name__ == "__main__":
    main()

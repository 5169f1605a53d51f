//! Parallel vs sequential throughput of the dense pipeline contraction and
//! the kernel tabulation. With the default `parallel` feature the same
//! workload is also pinned to a single rayon thread for comparison; built
//! with `--no-default-features` it measures the plain sequential path.

use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;

use tfrw::evolution::EvolutionKernel;
use tfrw::grid::ScaleGrid;
use tfrw::kernel::MeasurementKernel;
use tfrw::pipeline::{measure_once, MeasurementEvent};
use tfrw::profiles::SpectralProfile;
use tfrw::universe::gaussian_packet;

fn fixtures() -> (
    tfrw::universe::UniverseWavefunction,
    EvolutionKernel,
    MeasurementEvent,
) {
    let grid = ScaleGrid::log_uniform(0.2, 20.0, 801).unwrap();
    let prior = gaussian_packet(&grid, 1.0, 0.1).unwrap();
    let b = EvolutionKernel::broadened_scaling(2.0, 0.4).unwrap();
    let one = Complex64::new(1.0, 0.0);
    let ev = MeasurementEvent::new(
        SpectralProfile::lorentzian(one, 1.0, 10.0).unwrap(),
        SpectralProfile::lorentzian(one, 1.0, 5.0).unwrap(),
    )
    .unwrap();
    (prior, b, ev)
}

fn bench_measure(c: &mut Criterion) {
    let (prior, b, ev) = fixtures();
    let mut group = c.benchmark_group("measure_once_dense");
    group.sample_size(20);
    group.bench_function("default", |bench| {
        bench.iter(|| measure_once(&prior, &b, &ev).unwrap())
    });
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        group.bench_function("one_thread", |bench| {
            bench.iter(|| pool.install(|| measure_once(&prior, &b, &ev).unwrap()))
        });
    }
    group.finish();
}

fn bench_tabulate(c: &mut Criterion) {
    let (_, _, ev) = fixtures();
    let quad_kernel = MeasurementKernel {
        backend: tfrw::kernel::KernelBackend::Quadrature {
            f: ev.emit_profile.clone(),
            g: ev.detect_profile.clone(),
            rel_tol: 1e-9,
        },
        power: 1,
    };
    let mut group = c.benchmark_group("kernel_tabulate");
    group.sample_size(10);
    group.bench_function("default", |bench| {
        bench.iter(|| quad_kernel.tabulate(0.1, 10.0, 512).unwrap())
    });
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        group.bench_function("one_thread", |bench| {
            bench.iter(|| pool.install(|| quad_kernel.tabulate(0.1, 10.0, 512).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_measure, bench_tabulate);
criterion_main!(benches);

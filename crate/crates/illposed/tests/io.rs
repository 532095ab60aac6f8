use illposed::condensates::{SpectralDataset, SurfacePoint};
use illposed::eit::{DiscMesh, ElectrodeDataset, Excitation, Raster};
use illposed::fredholm::SampledKernel;
use illposed::io::*;
use illposed::regcore::SweepRow;
use illposed::Error;
use nalgebra::DMatrix;
use proptest::prelude::*;
use tempfile::tempdir;

fn finite() -> impl Strategy<Value = f64> {
    prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO
}

#[test]
fn mesh_round_trips() {
    let dir = tempdir().unwrap();
    let mesh = DiscMesh::rings(5).unwrap();
    let (n, t) = (dir.path().join("nodes.csv"), dir.path().join("tri.csv"));
    write_mesh_csv(&n, &t, &mesh).unwrap();
    let back = read_mesh_csv(&n, &t).unwrap();
    assert_eq!(back.nodes, mesh.nodes);
    assert_eq!(back.triangles, mesh.triangles);
    assert_eq!(back.boundary_nodes, mesh.boundary_nodes);
}

#[test]
fn kernel_round_trips_with_its_grid() {
    let dir = tempdir().unwrap();
    let k = SampledKernel::from_fn(|x, t| (x * t).exp(), 0.0, 1.0, 5, 2);
    let (m, g) = (dir.path().join("k.csv"), dir.path().join("grid.csv"));
    write_sampled_kernel(&m, &g, &k).unwrap();
    let back = read_sampled_kernel(&m, &g).unwrap();
    assert_eq!(back.values, k.values);
    assert_eq!(back.nodes, k.nodes);
    assert_eq!(back.weights, k.weights);
}

#[test]
fn spectral_dataset_round_trips() {
    let dir = tempdir().unwrap();
    let s = vec![0.5, 0.7, 0.9, 1.1];
    let cov = DMatrix::from_fn(4, 4, |i, j| if i == j { 1e-4 } else { 2e-5 });
    let d = SpectralDataset::new(s, vec![0.1, 0.2, 0.15, 0.05], cov).unwrap();
    let (v, c) = (dir.path().join("v.csv"), dir.path().join("c.csv"));
    write_spectral_dataset(&v, &c, &d).unwrap();
    let back = read_spectral_dataset(&v, &c).unwrap();
    assert_eq!(back.s, d.s);
    assert_eq!(back.values, d.values);
    assert_eq!(back.widths, d.widths);
    assert_eq!(back.covariance, d.covariance);
}

#[test]
fn surface_and_sweep_round_trip() {
    let dir = tempdir().unwrap();
    let surface = vec![
        SurfacePoint { params: [-6e-3, 1e-3], chi_l: 0.4, mu: 1.2, active: true },
        SurfacePoint { params: [-5e-3, 2e-3], chi_l: 0.9, mu: 0.0, active: false },
    ];
    let p = dir.path().join("surface.csv");
    write_surface_csv(&p, &[6, 8], &surface).unwrap();
    let (dims, back) = read_surface_csv(&p).unwrap();
    assert_eq!(dims, vec![6, 8]);
    assert_eq!(back, surface);

    let rows = vec![
        SweepRow { lambda: 1e-6, discrepancy: 0.01, energy: 3.0, solution: vec![] },
        SweepRow { lambda: 1e-3, discrepancy: 0.05, energy: 1.0, solution: vec![] },
    ];
    let p = dir.path().join("sweep.csv");
    write_sweep_csv(&p, &rows).unwrap();
    assert_eq!(read_sweep_csv(&p).unwrap(), vec![[1e-6, 0.01, 3.0], [1e-3, 0.05, 1.0]]);
}

#[test]
fn electrode_dataset_round_trips_and_is_validated() {
    let dir = tempdir().unwrap();
    let d = ElectrodeDataset {
        electrode_angles: vec![0.0, 2.0, 4.0],
        excitations: vec![Excitation { current: vec![1.0, -0.5, -0.5], potential: vec![0.3, -0.1, -0.2] }],
    };
    let p = dir.path().join("d.json");
    write_electrode_dataset(&p, &d).unwrap();
    assert_eq!(read_electrode_dataset(&p).unwrap(), d);

    let bad = ElectrodeDataset {
        electrode_angles: vec![0.0, 2.0],
        excitations: d.excitations.clone(),
    };
    write_json(&p, &bad).unwrap();
    assert!(read_electrode_dataset(&p).is_err());
}

#[test]
fn raster_keeps_nan_outside_the_disc() {
    let dir = tempdir().unwrap();
    let n = 5;
    let values = (0..n * n)
        .map(|k| {
            let (x, y) = (Raster::coord(n, k % n), Raster::coord(n, k / n));
            if x * x + y * y <= 1.0 { x - y } else { f64::NAN }
        })
        .collect();
    let r = Raster { n, values };
    let p = dir.path().join("r.csv");
    write_raster_csv(&p, &r).unwrap();
    let back = read_raster_csv(&p).unwrap();
    assert_eq!(back.n, n);
    for (a, b) in back.values.iter().zip(&r.values) {
        assert!(a == b || (a.is_nan() && b.is_nan()));
    }
}

#[test]
fn errors_name_the_file() {
    let dir = tempdir().unwrap();
    let missing = dir.path().join("absent.csv");
    match read_matrix_csv(&missing) {
        Err(Error::Io { path, .. }) => assert!(path.contains("absent.csv")),
        other => panic!("expected an I/O error, got {other:?}"),
    }
    let p = dir.path().join("t.csv");
    write_table_csv(&p, &Table::new(&["a"], vec![vec![1.0]])).unwrap();
    let err = read_field_csv(&p).unwrap_err();
    assert!(err.to_string().contains("t.csv"), "{err}");

    std::fs::write(&p, "a,b\n1,oops\n").unwrap();
    assert!(read_table_csv(&p).is_err());
}

proptest! {
    #[test]
    fn tables_round_trip_bit_for_bit(rows in prop::collection::vec(prop::collection::vec(finite(), 3), 0..20)) {
        let dir = tempdir().unwrap();
        let p = dir.path().join("t.csv");
        let table = Table::new(&["a", "b", "c"], rows);
        write_table_csv(&p, &table).unwrap();
        prop_assert_eq!(read_table_csv(&p).unwrap(), table);
    }

    #[test]
    fn matrices_and_fields_round_trip(values in prop::collection::vec(finite(), 1..40), cols in 1usize..5) {
        let dir = tempdir().unwrap();
        let rows = values.len().div_ceil(cols);
        let m = DMatrix::from_fn(rows, cols, |i, j| values.get(i * cols + j).copied().unwrap_or(0.0));
        let p = dir.path().join("m.csv");
        write_matrix_csv(&p, &m).unwrap();
        prop_assert_eq!(read_matrix_csv(&p).unwrap(), m);

        let points: Vec<[f64; 2]> = values.iter().map(|v| [*v, -v]).collect();
        let p = dir.path().join("f.csv");
        write_field_csv(&p, &points, &values).unwrap();
        let (pts, vals) = read_field_csv(&p).unwrap();
        prop_assert_eq!(pts, points);
        prop_assert_eq!(vals, values);
    }
}

use otcc_core::analysis::duality_gap_1d;
use otcc_core::{assign, dual_value, grad_phi, grad_x, Density, Grid, GridDensity, SwarmState, Tessellation, Workspace};

fn line(density: Density, lo: f64, hi: f64, cells: usize) -> GridDensity {
    let grid = Grid::new(Workspace::new(vec![lo], vec![hi]).unwrap(), vec![cells]).unwrap();
    density.discretize(&grid).unwrap()
}

fn gaussian_line(cells: usize) -> GridDensity {
    line(Density::gaussian(vec![0.0], vec![3.0]).unwrap(), -10.0, 10.0, cells)
}

fn square(cells: usize) -> GridDensity {
    let grid = Grid::new(
        Workspace::new(vec![-10.0, -10.0], vec![10.0, 10.0]).unwrap(),
        vec![cells, cells],
    )
    .unwrap();
    Density::gaussian(vec![1.0, -2.0], vec![6.0, 9.0]).unwrap().discretize(&grid).unwrap()
}

fn f_at(s: &SwarmState, gd: &GridDensity) -> f64 {
    dual_value(s, &Tessellation::build(gd, s).unwrap(), gd)
}

fn states() -> Vec<(SwarmState, GridDensity)> {
    vec![
        (
            SwarmState::new(1, vec![-6.0, -1.3, 0.4, 2.9], vec![0.3, -0.2, 0.0, 0.5]).unwrap(),
            gaussian_line(2000),
        ),
        (
            SwarmState::new(1, vec![-9.0, -8.2, -7.7], vec![0.0, 0.0, 0.0]).unwrap(),
            gaussian_line(2000),
        ),
        (
            SwarmState::from_points(&[vec![-3.07, 2.13], vec![4.21, 0.93], vec![0.47, -5.11]])
                .unwrap()
                .with_weights(vec![1.0, -0.5, 0.2])
                .unwrap(),
            square(200),
        ),
    ]
}

#[test]
fn position_gradient_is_exact_between_owner_changes() {
    let delta = 1e-6;
    for (s, gd) in states() {
        let t = Tessellation::build(&gd, &s).unwrap();
        let analytic = grad_x(&s, &t);
        let base = assign(gd.grid(), &s).unwrap();
        for k in 0..s.positions.len() {
            let (mut plus, mut minus) = (s.clone(), s.clone());
            plus.positions[k] += delta;
            minus.positions[k] -= delta;
            assert_eq!(assign(gd.grid(), &plus).unwrap(), base);
            assert_eq!(assign(gd.grid(), &minus).unwrap(), base);
            let fd = (f_at(&plus, &gd) - f_at(&minus, &gd)) / (2.0 * delta);
            assert!((fd - analytic[k]).abs() < 1e-6, "coord {k}: fd {fd} analytic {}", analytic[k]);
        }
    }
}

#[test]
fn weight_gradient_matches_within_one_cell() {
    for (s, gd) in states() {
        let t = Tessellation::build(&gd, &s).unwrap();
        let analytic = grad_phi(&t, s.len());
        let diam = gd.grid().workspace().diameter();
        let delta = 1e-6 * diam * diam;
        for i in 0..s.len() {
            let (mut plus, mut minus) = (s.clone(), s.clone());
            plus.weights[i] += delta;
            minus.weights[i] -= delta;
            let fd = (f_at(&plus, &gd) - f_at(&minus, &gd)) / (2.0 * delta);
            assert!(
                (fd - analytic[i]).abs() <= gd.max_cell_mass(),
                "robot {i}: fd {fd} analytic {}",
                analytic[i]
            );
        }
    }
}

#[test]
fn single_robot_has_no_gap() {
    let gd = gaussian_line(20_000);
    let r = duality_gap_1d(&[1.3], &gd, 100, 1.0).unwrap();
    assert!(r.converged);
    assert!(r.gap < 1e-3, "{r:?}");
    // W = (Var + (x - mean)^2) / 2 for a single point, up to truncation at the walls
    assert!((r.oracle_w - 0.5 * (3.0 + 1.69)).abs() < 1e-2, "{}", r.oracle_w);
}

#[test]
fn uniform_pair_reaches_the_known_optimum() {
    let gd = line(Density::uniform(vec![0.0], vec![1.0]).unwrap(), 0.0, 1.0, 20_000);
    let r = duality_gap_1d(&[0.25, 0.75], &gd, 20_000, 0.05).unwrap();
    assert!(r.converged);
    assert!((r.oracle_w - 1.0 / 96.0).abs() < 1e-9, "{}", r.oracle_w);
    assert!((r.max_f - 1.0 / 96.0).abs() < 1e-4, "{}", r.max_f);
}

#[test]
fn five_robots_close_the_gap() {
    let gd = gaussian_line(100_000);
    let r = duality_gap_1d(&[-4.1, -1.7, 0.2, 0.9, 3.6], &gd, 50_000, 1.0).unwrap();
    assert!(r.converged, "{r:?}");
    assert!(r.gap < 1e-3, "{r:?}");
}

#[test]
fn refining_the_grid_does_not_widen_the_gap() {
    let x = [-3.0, -0.5, 2.2];
    let coarse = duality_gap_1d(&x, &gaussian_line(10_000), 50_000, 1.0).unwrap();
    let fine = duality_gap_1d(&x, &gaussian_line(20_000), 50_000, 1.0).unwrap();
    assert!(fine.gap <= 1.1 * coarse.gap + 1e-6, "coarse {} fine {}", coarse.gap, fine.gap);
}

#[test]
fn ascent_never_exceeds_the_transport_cost() {
    let gd = gaussian_line(20_000);
    let r = duality_gap_1d(&[-2.0, 0.0, 5.0], &gd, 50_000, 1.0).unwrap();
    let slack = 3.0 * gd.max_cell_mass() * 400.0;
    assert!(r.max_f <= r.oracle_w + slack, "{} {}", r.max_f, r.oracle_w);
}

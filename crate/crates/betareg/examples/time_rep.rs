use std::time::Instant;
use betareg::lasso::{fit_lasso_at, fit_lasso_path, lasso_lambda_max, transform_response};
use betareg::rng::derive_rng;
use betareg::simgen::{gen_scenario_data, SimScenario};

fn main() {
    let sc = SimScenario { n: 200, p: 300, s_star: 10, rho_x: 0.0, phi_true: 10.0, n_test: 30, seed: 4001 };
    let data = gen_scenario_data(&sc).unwrap();
    let ystar = transform_response(&data.y).unwrap();
    let lmax = lasso_lambda_max(&data.x, &ystar).unwrap();

    for frac in [0.5, 0.1, 0.01, 0.001, 0.0001] {
        let t = Instant::now();
        let (coef, _) = fit_lasso_at(&data.x, &ystar, lmax * frac).unwrap();
        let nz = coef.iter().filter(|&&c| c != 0.0).count();
        println!("single fit at {:.4} lmax: {:.2}s, support {}", frac, t.elapsed().as_secs_f64(), nz);
    }

    let t = Instant::now();
    let mut rng = derive_rng(7, &[]);
    let fit = fit_lasso_path(&data.x, &ystar, 100, &mut rng).unwrap();
    println!("full path+cv: {:.1}s, selected {:.3} of lmax", t.elapsed().as_secs_f64(), fit.lambda_selected / lmax);
}

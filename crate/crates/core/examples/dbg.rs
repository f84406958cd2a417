use shapedyn::curve::{self, shapes, Vec2};
use shapedyn::shape::*;
use std::time::Instant;
fn preshape(c: &curve::Contour<f64>, n: usize) -> PreShape<f64> {
    let r = curve::resample_uniform(c, n).unwrap();
    let s = curve::center_and_scale(&r).unwrap();
    PreShape::new(curve::to_srvf(&s).unwrap()).unwrap()
}
fn main() {
    let q1 = preshape(&shapes::blob(1.0, 4, 0.2, 400), 100);
    let q2 = preshape(&shapes::blob(1.0, 5, 0.15, 400), 100);
    for (name, cfg) in [
        ("stride5", AlignConfig::default()),
        ("prefilter3", AlignConfig::fast()),
    ] {
        let t0 = Instant::now();
        let reps = 50;
        let mut acc = 0.0;
        for _ in 0..reps {
            let (_, a) = align_reparam(&q1, &q2, &cfg).unwrap();
            acc += preshape_distance(&q1, &a);
        }
        let dt = t0.elapsed().as_secs_f64() / reps as f64;
        println!("{name}: {:.3} ms per alignment (d={:.4})", dt * 1e3, acc / reps as f64);
    }
}

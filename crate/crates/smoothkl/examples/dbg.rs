use smoothkl::asymptotics::*;
use smoothkl::losses::LossSpec;
use smoothkl::quadrature::*;
use smoothkl::smoothing::SmoothingLevel;

fn main() {
    let measure = CovariateMeasure::intercept_normal();
    let f = |x: &[f64]| {
        let p = 1.0 / (1.0 + (-(2.0 * x[0] + 4.0 * x[1])).exp());
        p * (1.0 - p) * x[1] * x[1]
    };
    let a = measure.integrate(&QuadratureSpec::new(200).unwrap(), f).unwrap();
    let b = measure.integrate(&QuadratureSpec::new(400).unwrap(), f).unwrap();
    println!("200: {a:.16e}\n400: {b:.16e}\ndiff = {:.3e}", (a - b).abs());

    let beta = TrueParameter::new(vec![1.0, 2.0]).unwrap();
    let quad = QuadratureSpec::default();
    let spec0 = LossSpec::Mlslr(SmoothingLevel::new(0.0, 2).unwrap());
    let (a0, b0) = ab_matrices(&spec0, &beta, &measure, &quad).unwrap();
    let (al, bl) = ab_matrices(&LossSpec::Lr, &beta, &measure, &quad).unwrap();
    println!("A diff = {:.3e}  B diff = {:.3e}", (&a0 - &al).abs().max(), (&b0 - &bl).abs().max());
    println!("a0 = {a0} al = {al}");
}

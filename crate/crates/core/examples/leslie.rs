//! Growth rate, stable age structure and reproductive values of a Leslie model.

use chronoflow::demography::{leslie_matrix, project_population, stable_structure, DemographyError, LeslieModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = LeslieModel::new(vec![1.0, 1.0], vec![0.5])?;
    println!("L = {}", leslie_matrix(&model)?);
    let s = stable_structure(&model)?;
    println!("lambda {:.12} (closed form {:.12})", s.lambda, (1.0 + 3f64.sqrt()) / 2.0);
    println!("u {:.6?}, v {:.6?}", s.u, s.v);

    let path = project_population(&vec![model; 200], &[10.0, 0.0])?;
    let z = path.last().expect("non-empty");
    let total: f64 = z.iter().sum();
    println!("after 200 steps: structure {:.6?}", z.iter().map(|v| v / total).collect::<Vec<_>>());

    let periodic = LeslieModel::new(vec![0.0, 1.0], vec![1.0])?;
    match stable_structure(&periodic) {
        Err(DemographyError::NotPrimitive) => println!("period-2 model: not primitive"),
        other => println!("period-2 model: {other:?}"),
    }
    Ok(())
}

//! Euclidean projection onto the probability simplex.
use xlayer::moo_core::project_to_simplex;

fn main() -> xlayer::Result<()> {
    for v in [
        vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        vec![0.6, 0.6, 0.6],
        vec![1.5, 0.2, -0.4],
        vec![0.9, -0.1],
        vec![3.0, 2.5, -1.0, 0.0, 2.9],
    ] {
        let w = project_to_simplex(&v)?;
        println!("{v:?} -> {:?}", w.as_slice());
    }
    Ok(())
}

//! Principal components of a multi-variable panel, written as a scores CSV.

use chronoflow::dataset::{load_dataset, run_pca, write_dataset, ColumnMapping, Impute};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/pca_input.csv");
    let ds = load_dataset(path, &ColumnMapping::standard(&["cc1", "cc2", "cc3", "cc4", "cc5"]))?;
    for impute in [Impute::DropIncomplete, Impute::MeanFill] {
        let pca = run_pca(&ds, impute)?;
        println!("{impute:?}: {} rows, explained {:.3?}", pca.rows.len(), pca.explained_fraction);
        println!("  PC1 loadings {:.3?}", pca.components[0]);
    }
    let scores = run_pca(&ds, Impute::MeanFill)?.scores_dataset();
    write_dataset(&scores, std::io::stdout().lock())?;
    Ok(())
}

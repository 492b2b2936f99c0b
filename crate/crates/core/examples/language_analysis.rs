//! Per-language table with macro averages, and ECE against language features.

use qacal::analysis::{
    correlate_ece_with_features, relative_increase, FeatureTable, LanguageMetricsRow, LanguageTable,
};
use qacal::report::{correlation_table, language_table, OutputFormat};

// Exact match and ECE (percent) of a multilingual extractive model on XQuAD.
const RESULTS: [(&str, f64, f64); 12] = [
    ("en", 67.52, 7.32),
    ("ar", 37.06, 21.19),
    ("de", 51.84, 14.55),
    ("el", 39.18, 18.65),
    ("es", 51.08, 14.00),
    ("hi", 38.23, 21.31),
    ("ro", 52.71, 14.36),
    ("ru", 42.17, 19.72),
    ("th", 35.81, 20.72),
    ("tr", 39.73, 19.18),
    ("vi", 44.16, 20.19),
    ("zh", 53.05, 14.03),
];

// Illustrative distances from English and pretraining shares.
const FEATURES: &str = "language,syntactic,genetic,pretrain_size
en,0.00,0.00,0.50
ar,0.57,1.00,0.01
de,0.42,0.50,0.06
el,0.52,0.80,0.01
es,0.40,0.80,0.05
hi,0.59,0.80,0.01
ro,0.47,0.80,0.01
ru,0.48,0.80,0.04
th,0.60,1.00,0.01
tr,0.60,1.00,0.01
vi,0.54,1.00,0.01
zh,0.57,1.00,0.03
";

fn main() -> qacal::Result<()> {
    let rows: Vec<LanguageMetricsRow> = RESULTS
        .iter()
        .map(|&(language, em, ece)| LanguageMetricsRow {
            language: language.into(),
            n: 1190,
            em_rate: em / 100.0,
            ece: ece / 100.0,
        })
        .collect();
    let table = LanguageTable::from_rows(rows.clone())?;
    print!("{}", language_table(&table, OutputFormat::Table));

    let non_en = table
        .macro_non_english
        .as_ref()
        .expect("non-English rows present");
    let en = table.row("en").expect("English row present");
    println!(
        "\nnon-English: error {:.2}%, ECE {:.2}, ECE increase over English {:.1}%\n",
        100.0 * (1.0 - non_en.em_rate),
        100.0 * non_en.ece,
        100.0 * relative_increase(en.ece, non_en.ece)
    );

    let features = FeatureTable::from_csv(FEATURES.as_bytes())?;
    let report = correlate_ece_with_features(&rows, &features)?;
    print!("{}", correlation_table(&report, OutputFormat::Table));
    Ok(())
}

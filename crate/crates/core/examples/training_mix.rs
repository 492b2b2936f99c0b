//! Training-mix manifests over a toy parallel corpus.

use qacal::corpus::{build_mix_manifest, MixConfig, MixMode, ParallelCorpusEntry};

fn main() -> qacal::Result<()> {
    let languages: Vec<String> = ["en", "de", "ar"].iter().map(|s| s.to_string()).collect();
    let corpus: Vec<ParallelCorpusEntry> = (0..8)
        .flat_map(|i| {
            languages.iter().map(move |lang| ParallelCorpusEntry {
                example_id: format!("ex{i}"),
                language: lang.clone(),
                question: format!("question {i} ({lang})"),
                context: format!("context {i}"),
                answer: format!("answer {i}"),
            })
        })
        .collect();

    for mode in [MixMode::En, MixMode::EnTr, MixMode::EnLarge, MixMode::Mixed] {
        let manifest =
            build_mix_manifest(&corpus, &MixConfig::new(mode, 2, languages.clone(), 42))?;
        let items: Vec<String> = manifest
            .iter()
            .map(|e| format!("{}/{}", e.example_id, e.language))
            .collect();
        println!(
            "{:<8} {:>2}  {}",
            mode.as_str(),
            manifest.len(),
            items.join(" ")
        );
    }

    let mut fewshot = MixConfig::new(MixMode::Fewshot, 1, languages, 42);
    fewshot.fewshot_per_lang = 2;
    let manifest = build_mix_manifest(&corpus, &fewshot)?;
    println!(
        "fewshot  {:>2}  (8 English + 2 per other language)",
        manifest.len()
    );
    Ok(())
}

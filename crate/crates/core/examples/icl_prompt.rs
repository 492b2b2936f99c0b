//! Pick in-context examples by embedding similarity and render the prompt.

use qacal::corpus::{render_prompt, select_icl_examples, IclStrategy, Shot};

fn main() -> qacal::Result<()> {
    let pool = [
        (
            "Who wrote Faust?",
            "Faust is a tragic play by Goethe.",
            "Goethe",
            vec![0.9, 0.1, 0.0],
        ),
        (
            "What is the capital of Peru?",
            "Lima is the capital of Peru.",
            "Lima",
            vec![0.0, 1.0, 0.2],
        ),
        (
            "Who painted Guernica?",
            "Guernica was painted by Picasso in 1937.",
            "Picasso",
            vec![0.8, 0.0, 0.3],
        ),
        (
            "How long is the Nile?",
            "The Nile is about 6650 km long.",
            "about 6650 km",
            vec![0.1, 0.2, 0.9],
        ),
    ];
    let embeddings: Vec<&Vec<f64>> = pool.iter().map(|p| &p.3).collect();
    let query = [1.0, 0.05, 0.1];

    let adaptive = select_icl_examples(&query, &embeddings, 2, IclStrategy::Adaptive, 0)?;
    let random = select_icl_examples(&query, &embeddings, 2, IclStrategy::Random, 11)?;
    println!("adaptive {adaptive:?}, random (seed 11) {random:?}\n");

    let shots: Vec<Shot> = adaptive
        .iter()
        .map(|&i| Shot {
            question: pool[i].0.into(),
            context: pool[i].1.into(),
            answer: pool[i].2.into(),
        })
        .collect();
    print!(
        "{}",
        render_prompt(
            "Who composed the Ring cycle?",
            "Der Ring des Nibelungen is by Wagner.",
            &shots
        )
    );
    Ok(())
}

//! Prints the bundled sample corpus (`data/sample_corpus.jsonl`) to stdout.

fn main() {
    let messages = dialogue_rules::synth::sample_corpus(dialogue_rules::synth::CORPUS_SEED);
    print!("{}", dialogue_rules::synth::to_jsonl(&messages));
}

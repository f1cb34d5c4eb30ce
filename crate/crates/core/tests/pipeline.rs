use exactlex::corpus::count_text;
use exactlex::render::{render_assoc_tsv, RenderOptions};
use exactlex::{
    association_scan, bigram_table, fisher_exact, make_table, zipf_summary, ExpectedTableExact, FisherResultF32,
    FisherResultF64, TokenizerConfig,
};
use num_rational::BigRational;

const TEXT: &str = "The oil industry grew. The steel industry shrank.\n\
                    Oil prices rose, and the oil industry cheered.\n\
                    Steel prices fell; the steel industry did not.";

#[test]
fn text_to_ranked_tsv() {
    let (words, counts) = count_text(TEXT, &TokenizerConfig::default());
    assert_eq!(words.get("industry"), 4);
    let t = bigram_table(&counts, "oil", "industry").unwrap();
    assert_eq!(t.n11(), 2);
    assert_eq!(t.total(), counts.total_bigrams());

    let records = association_scan(&counts, "industry").unwrap();
    let words_ranked: Vec<&str> = records.iter().map(|r| r.word.as_str()).collect();
    assert_eq!(words_ranked.len(), 2);
    assert!(words_ranked.contains(&"oil") && words_ranked.contains(&"steel"));
    let tsv = render_assoc_tsv(&records, &RenderOptions::TSV);
    assert_eq!(tsv.lines().count(), 3);

    let z = zipf_summary(&counts, &words);
    assert_eq!(z.token_count, words.token_count());
    assert_eq!(z.bigram_count, counts.total_bigrams());
}

#[test]
fn precisions_agree() {
    for cells in [[3u64, 1, 1, 3], [17, 229, 935, 1_381_647], [5, 0, 2, 9], [40, 10, 12, 33]] {
        let t = make_table(cells[0], cells[1], cells[2], cells[3]).unwrap();
        let d: FisherResultF64 = fisher_exact(&t);
        let s: FisherResultF32 = fisher_exact(&t);
        for (a, b) in [(d.left_p, s.left_p), (d.right_p, s.right_p), (d.two_sided_p, s.two_sided_p)] {
            assert!((a - f64::from(b)).abs() <= 1e-5 * a.max(1e-30) + 1e-30, "{cells:?}: {a} vs {b}");
        }
    }
}

#[test]
fn exact_expected_counts_match_float() {
    let t = make_table(17, 229, 935, 1_381_647).unwrap();
    let exact: ExpectedTableExact = t.expected_counts();
    assert_eq!(exact.total(), BigRational::from_integer(1_382_828.into()));
    let float = t.expected_counts::<f64>();
    use num_traits::ToPrimitive;
    for (q, f) in exact.cells().iter().zip(float.cells()) {
        assert!((q.to_f64().unwrap() - f).abs() <= f * 1e-15);
    }
}

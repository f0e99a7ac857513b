use super::types::{Lexicon, TernaryLabel};
use crate::error::{Error, Result};

/// Sets each instance's score to the mean judgement value and its label to
/// the ternarized score.
pub fn aggregate_and_ternarize(lexicon: &Lexicon) -> Result<Lexicon> {
    let mut out = lexicon.clone();
    for inst in &mut out.instances {
        let n = inst.judgements.len();
        if n < 2 {
            return Err(Error::TooFewJudgements {
                instance_id: inst.instance_id.clone(),
                count: n,
            });
        }
        let sum: i64 = inst.judgement_values().map(i64::from).sum();
        let score = sum as f64 / n as f64;
        inst.aggregate_score = Some(score);
        inst.label = Some(TernaryLabel::from_score(score));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::types::{ConnotationInstance, Dimension, Judgement, Language};

    fn single(values: &[i8]) -> Lexicon {
        let lang = Language::new("en").unwrap();
        let mut lex = Lexicon::new(lang.clone(), Dimension::SentSubj);
        lex.instances.push(ConnotationInstance {
            instance_id: "i".into(),
            verb_lemma: "v".into(),
            context_sentence: "s".into(),
            verb_token_index: 0,
            language: lang,
            dimension: Dimension::SentSubj,
            judgements: values
                .iter()
                .enumerate()
                .map(|(i, v)| Judgement::new(format!("a{i}"), *v).unwrap())
                .collect(),
            aggregate_score: None,
            label: None,
        });
        lex
    }

    fn run(values: &[i8]) -> (f64, TernaryLabel) {
        let out = aggregate_and_ternarize(&single(values)).unwrap();
        let inst = &out.instances[0];
        (inst.aggregate_score.unwrap(), inst.label.unwrap())
    }

    #[test]
    fn two_positive_one_neutral_is_positive() {
        let (score, label) = run(&[1, 1, 0]);
        assert!((score - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(label, TernaryLabel::Positive);
    }

    #[test]
    fn symmetric_judgements_are_neutral() {
        assert_eq!(run(&[1, -1, 0]), (0.0, TernaryLabel::Neutral));
        assert_eq!(run(&[1, -1]), (0.0, TernaryLabel::Neutral));
    }

    #[test]
    fn single_judgement_is_an_error() {
        let err = aggregate_and_ternarize(&single(&[1])).unwrap_err();
        assert!(matches!(err, Error::TooFewJudgements { count: 1, .. }));
    }

    #[test]
    fn exact_boundary_is_polar() {
        // 7 positive, 13 neutral -> 7/20 = 0.35
        let mut values = vec![1i8; 7];
        values.extend(std::iter::repeat(0).take(13));
        assert_eq!(run(&values).1, TernaryLabel::Positive);
        let neg: Vec<i8> = values.iter().map(|v| -v).collect();
        assert_eq!(run(&neg).1, TernaryLabel::Negative);
    }
}

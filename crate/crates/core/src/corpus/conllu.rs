//! Minimal CoNLL-U reader. Multiword-token ranges (`3-4`) and empty nodes
//! (`5.1`) are skipped; only basic dependencies are kept.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    /// 1-based position in the sentence.
    pub id: usize,
    pub form: String,
    pub lemma: String,
    pub upos: String,
    /// 0 is the root; `None` when the parse is missing (`_`).
    pub head: Option<usize>,
    pub deprel: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sent_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    pub tokens: Vec<Token>,
}

impl Sentence {
    pub fn is_parsed(&self) -> bool {
        !self.tokens.is_empty() && self.tokens.iter().all(|t| t.head.is_some())
    }

    /// Token with the given 1-based id.
    pub fn token(&self, id: usize) -> Option<&Token> {
        self.tokens.get(id.checked_sub(1)?).filter(|t| t.id == id)
    }

    pub fn dependents(&self, head: usize) -> impl Iterator<Item = &Token> + '_ {
        self.tokens.iter().filter(move |t| t.head == Some(head))
    }

    pub fn forms(&self) -> Vec<String> {
        self.tokens.iter().map(|t| t.form.clone()).collect()
    }

    /// The `# text` comment if present, else the forms joined by spaces.
    pub fn surface(&self) -> String {
        self.text
            .clone()
            .unwrap_or_else(|| self.forms().join(" "))
    }
}

/// Strips the relation subtype: `nsubj:pass` -> `nsubj`.
pub fn base_relation(deprel: &str) -> &str {
    deprel.split(':').next().unwrap_or(deprel)
}

pub fn parse_conllu(text: &str) -> Result<Vec<Sentence>> {
    let mut sentences = Vec::new();
    let mut current = Sentence {
        sent_id: None,
        text: None,
        tokens: Vec::new(),
    };
    let flush = |s: &mut Sentence, out: &mut Vec<Sentence>| {
        if !s.tokens.is_empty() {
            out.push(std::mem::replace(
                s,
                Sentence {
                    sent_id: None,
                    text: None,
                    tokens: Vec::new(),
                },
            ));
        } else {
            s.sent_id = None;
            s.text = None;
        }
    };

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            flush(&mut current, &mut sentences);
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((k, v)) = comment.split_once('=') {
                match k.trim() {
                    "sent_id" => current.sent_id = Some(v.trim().to_string()),
                    "text" => current.text = Some(v.trim().to_string()),
                    _ => {}
                }
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(Error::Conllu {
                line: line_no,
                message: format!("expected 10 tab-separated columns, found {}", cols.len()),
            });
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let id: usize = cols[0].parse().map_err(|_| Error::Conllu {
            line: line_no,
            message: format!("bad token id {:?}", cols[0]),
        })?;
        if id != current.tokens.len() + 1 {
            return Err(Error::Conllu {
                line: line_no,
                message: format!("token id {id} out of sequence"),
            });
        }
        let head = match cols[6] {
            "_" => None,
            h => Some(h.parse().map_err(|_| Error::Conllu {
                line: line_no,
                message: format!("bad head {h:?}"),
            })?),
        };
        let lemma = if cols[2] == "_" && cols[1] != "_" {
            cols[1].to_lowercase()
        } else {
            cols[2].to_string()
        };
        current.tokens.push(Token {
            id,
            form: cols[1].to_string(),
            lemma,
            upos: cols[3].to_string(),
            head,
            deprel: cols[7].to_string(),
        });
    }
    flush(&mut current, &mut sentences);

    for s in &sentences {
        let n = s.tokens.len();
        if let Some(t) = s.tokens.iter().find(|t| t.head.is_some_and(|h| h > n)) {
            return Err(Error::Conllu {
                line: 0,
                message: format!(
                    "head {} of token {} in sentence {:?} is out of range",
                    t.head.unwrap_or_default(),
                    t.id,
                    s.sent_id
                ),
            });
        }
    }
    Ok(sentences)
}

/// Renders sentences back to CoNLL-U with the columns this reader keeps.
pub fn to_conllu(sentences: &[Sentence]) -> String {
    let mut out = String::new();
    for s in sentences {
        if let Some(id) = &s.sent_id {
            out.push_str(&format!("# sent_id = {id}\n"));
        }
        if let Some(text) = &s.text {
            out.push_str(&format!("# text = {text}\n"));
        }
        for t in &s.tokens {
            let head = t.head.map_or("_".to_string(), |h| h.to_string());
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t_\t_\t{}\t{}\t_\t_\n",
                t.id, t.form, t.lemma, t.upos, head, t.deprel
            ));
        }
        out.push('\n');
    }
    out
}

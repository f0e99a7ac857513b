//! Regenerates the bundled fixture data under `crates/core/fixtures`.
//!
//! ```text
//! cargo run -p caa-core --example make_fixtures [-- <out_dir>]
//! ```
//!
//! Everything is drawn from a seeded ChaCha8 stream, so the output is the
//! same on every run and the committed files can be checked against it.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use caa_core::corpus::{Attributes, DumpRecord, Group};
use caa_core::features::{write_features, FeatureFile, FeatureHeader, FeatureRecord};
use caa_core::lexicon::{Dimension, Language};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const SEED: u64 = 20_190_701;
const DIM: usize = 16;
const ENCODER: &str = "fixture-encoder";
const LANGS: [&str; 3] = ["en", "es", "ru"];
const INSTANCES_PER_LANG: usize = 60;
const N_ANNOTATORS: usize = 20;
const SPAMMER: &str = "w19";

const VERBS_EN: [&str; 20] = [
    "rescue", "help", "attack", "love", "fear", "praise", "criticize", "defeat", "support", "lead", "follow",
    "obey", "teach", "admire", "betray", "protect", "hire", "fire", "interview", "meet",
];
const VERBS_ES: [&str; 20] = [
    "rescatar", "ayudar", "atacar", "amar", "temer", "elogiar", "criticar", "derrotar", "apoyar", "liderar",
    "seguir", "obedecer", "enseñar", "admirar", "traicionar", "proteger", "contratar", "despedir", "entrevistar",
    "conocer",
];
const VERBS_RU: [&str; 20] = [
    "спасти", "помочь", "атаковать", "любить", "бояться", "хвалить", "критиковать", "победить", "поддержать",
    "возглавить", "следовать", "подчиняться", "учить", "восхищаться", "предать", "защитить", "нанять", "уволить",
    "интервьюировать", "встретить",
];

/// Power, agency, subject sentiment and object sentiment of each English verb.
const VERB_LABELS: [[i8; 4]; 20] = [
    [1, 1, 1, 0],
    [1, 1, 1, 1],
    [1, 1, -1, -1],
    [0, 0, 1, 1],
    [-1, -1, -1, 0],
    [1, 1, 1, 1],
    [1, 1, -1, -1],
    [1, 1, 1, -1],
    [0, 1, 1, 1],
    [1, 1, 0, 0],
    [-1, -1, 0, 0],
    [-1, -1, 0, 1],
    [1, 1, 1, 0],
    [-1, 0, 1, 1],
    [1, 1, -1, -1],
    [1, 1, 1, 1],
    [1, 1, 0, 0],
    [1, 1, -1, -1],
    [0, 1, 0, 0],
    [0, 0, 0, 0],
];

const NOUNS: [[&str; 8]; 3] = [
    ["committee", "senator", "crowd", "director", "critic", "family", "team", "rival"],
    ["comité", "senador", "multitud", "director", "crítico", "familia", "equipo", "rival"],
    ["комитет", "сенатор", "толпа", "директор", "критик", "семья", "команда", "соперник"],
];
const DETERMINERS: [Option<&str>; 3] = [Some("the"), Some("el"), None];
const PRONOUNS: [[&str; 2]; 3] = [["he", "she"], ["él", "ella"], ["он", "она"]];

fn verbs(lang: usize) -> &'static [&'static str; 20] {
    [&VERBS_EN, &VERBS_ES, &VERBS_RU][lang]
}

fn verb_form(lang: usize, lemma: &str) -> String {
    if lang == 0 {
        if lemma.ends_with('e') {
            format!("{lemma}d")
        } else {
            format!("{lemma}ed")
        }
    } else {
        lemma.to_string()
    }
}

fn judgement_text(dim: Dimension, value: i8) -> &'static str {
    match (dim, value) {
        (Dimension::Power, -1) => "subject has less power",
        (Dimension::Power, 0) => "subject has equal power",
        (Dimension::Power, _) => "subject has more power",
        (Dimension::Agency, -1) => "low",
        (Dimension::Agency, 0) => "moderate",
        (Dimension::Agency, _) => "high",
        (_, -1) => "negative",
        (_, 0) => "neutral",
        (_, _) => "positive",
    }
}

fn other_value(rng: &mut ChaCha8Rng, v: i8) -> i8 {
    let others: Vec<i8> = [-1, 0, 1].into_iter().filter(|&x| x != v).collect();
    *others.choose(rng).unwrap()
}

/// Label-bearing embedding: a noisy one-hot block of three components per
/// dimension, plus pure-noise padding.
fn embed(rng: &mut ChaCha8Rng, labels: [i8; 4], noise: f64) -> Vec<f32> {
    let normal = Normal::new(0.0, noise).unwrap();
    let mut v = vec![0f32; DIM];
    for (d, &label) in labels.iter().enumerate() {
        v[3 * d + (label + 1) as usize] = 2.0;
    }
    for x in v.iter_mut() {
        *x += normal.sample(rng) as f32;
    }
    v
}

fn feature_file(lang: &str, records: Vec<(String, Vec<f32>)>, role: &str) -> FeatureFile {
    let language = Language::new(lang).unwrap();
    let mut metadata = BTreeMap::new();
    metadata.insert("pooling".to_string(), "mean".to_string());
    metadata.insert("role".to_string(), role.to_string());
    FeatureFile::new(
        FeatureHeader {
            dim: DIM,
            language: language.clone(),
            encoder: ENCODER.into(),
            layer: -1,
            metadata,
        },
        records
            .into_iter()
            .map(|(key, vector)| FeatureRecord {
                key,
                language: language.clone(),
                vector,
            })
            .collect(),
    )
    .unwrap()
}

struct Lang {
    /// Per verb index: labels in this language.
    labels: Vec<[i8; 4]>,
}

fn annotations(rng: &mut ChaCha8Rng, out: &Path, langs: &[Lang]) {
    let mut csv = String::from("instance_id,language,dimension,verb_lemma,sentence,verb_token_index,annotator_id,judgement\n");
    let good: Vec<String> = (0..N_ANNOTATORS - 1).map(|i| format!("w{i:02}")).collect();
    let mut inst_features: Vec<Vec<(String, Vec<f32>)>> = vec![Vec::new(); 3];
    let mut translated: Vec<Vec<(String, Vec<f32>)>> = vec![Vec::new(); 3];
    for (li, lang) in LANGS.iter().enumerate() {
        for i in 0..INSTANCES_PER_LANG {
            let verb = i % verbs(li).len();
            let lemma = verbs(li)[verb];
            let subj = NOUNS[li][rng.random_range(0..8)];
            let obj = NOUNS[li][rng.random_range(0..8)];
            let (sentence, index) = match DETERMINERS[li] {
                Some(det) => (format!("{det} {subj} {} {det} {obj}", verb_form(li, lemma)), 2),
                None => (format!("{subj} {} {obj}", verb_form(li, lemma)), 1),
            };
            // Context can shift a label away from the verb's usual one.
            let mut labels = langs[li].labels[verb];
            for l in labels.iter_mut() {
                if rng.random_bool(0.15) {
                    *l = other_value(rng, *l);
                }
            }
            let id = format!("{lang}-{i:03}");
            inst_features[li].push((id.clone(), embed(rng, labels, 0.6)));
            if li > 0 {
                // English translation of the sentence: a noisier view.
                translated[li].push((id.clone(), embed(rng, labels, 1.6)));
            }
            for (d, dim) in Dimension::ALL.into_iter().enumerate() {
                let truth = labels[d];
                let with_spammer = rng.random_bool(0.3);
                let n_good = if with_spammer { 3 } else { 4 };
                let picked: Vec<&String> = good.choose_multiple(rng, n_good).collect();
                let mut rows: Vec<(String, i8)> = picked
                    .into_iter()
                    .map(|a| {
                        let v = if !with_spammer && rng.random_bool(0.1) {
                            other_value(rng, truth)
                        } else {
                            truth
                        };
                        (a.clone(), v)
                    })
                    .collect();
                if with_spammer {
                    rows.push((SPAMMER.into(), other_value(rng, truth)));
                }
                rows.shuffle(rng);
                for (a, v) in rows {
                    writeln!(csv, "{id},{lang},{dim},{lemma},{sentence},{index},{a},{}", judgement_text(dim, v)).unwrap();
                }
            }
        }
    }
    std::fs::write(out.join("annotations.csv"), csv).unwrap();
    std::fs::create_dir_all(out.join("features")).unwrap();
    for (li, lang) in LANGS.iter().enumerate() {
        let f = feature_file(lang, std::mem::take(&mut inst_features[li]), "instances");
        write_features(&f, &out.join(format!("features/instances_{lang}.caafeat"))).unwrap();
        if li > 0 {
            let f = feature_file("en", std::mem::take(&mut translated[li]), &format!("translated_{lang}"));
            write_features(&f, &out.join(format!("features/translated_{lang}.caafeat"))).unwrap();
        }
    }
}

fn translation_tables(out: &Path) {
    std::fs::create_dir_all(out.join("translations")).unwrap();
    for li in 1..3 {
        let lang = LANGS[li];
        let mut csv = String::from("source_lemma,source_language,target_lemma,accepted_flag\n");
        for (v, lemma) in verbs(li).iter().enumerate() {
            // One deliberately wrong row, flagged as rejected.
            let (target, flag) = if v == 19 { ("know", "0") } else { (VERBS_EN[v], "1") };
            writeln!(csv, "{lemma},{lang},{target},{flag}").unwrap();
        }
        std::fs::write(out.join(format!("translations/{lang}_en.csv")), csv).unwrap();
    }
}

struct Person {
    id: String,
    group: Group,
    first: &'static str,
    last: &'static str,
    she: bool,
    categories: Vec<String>,
    attributes: Attributes,
    /// Subject-slot mention sentences per language.
    n_subject: [usize; 3],
    /// Verb indices this person tends to be the subject of.
    verb_pool: Vec<usize>,
}

const FIRST: [&str; 20] = [
    "Alice", "Bruno", "Clara", "Daniel", "Elena", "Felix", "Greta", "Hugo", "Irene", "Jonas", "Karla", "Leon",
    "Marta", "Nico", "Olga", "Pablo", "Rosa", "Simon", "Tania", "Victor",
];
const LAST: [&str; 20] = [
    "Moreno", "Becker", "Lund", "Ortega", "Novak", "Hale", "Berg", "Santos", "Kowal", "Price", "Mendes", "Ward",
    "Roth", "Silva", "Petrov", "Castro", "Young", "Baker", "Ivanova", "Reyes",
];

fn transliterate(s: &str) -> String {
    let table = [
        ('a', "а"), ('b', "б"), ('c', "к"), ('d', "д"), ('e', "е"), ('f', "ф"), ('g', "г"), ('h', "х"), ('i', "и"),
        ('j', "й"), ('k', "к"), ('l', "л"), ('m', "м"), ('n', "н"), ('o', "о"), ('p', "п"), ('r', "р"), ('s', "с"),
        ('t', "т"), ('u', "у"), ('v', "в"), ('w', "в"), ('y', "и"), ('z', "з"), ('x', "кс"), ('q', "к"),
    ];
    let mut out = String::new();
    for (i, c) in s.chars().enumerate() {
        let lower = c.to_ascii_lowercase();
        let t = table.iter().find(|(k, _)| *k == lower).map(|(_, v)| *v).unwrap_or("");
        if i == 0 {
            let mut cs = t.chars();
            if let Some(f) = cs.next() {
                out.extend(f.to_uppercase());
                out.extend(cs);
            }
        } else {
            out.push_str(t);
        }
    }
    out
}

fn names(p: &Person, li: usize) -> (String, String) {
    if li == 2 {
        (transliterate(p.first), transliterate(p.last))
    } else {
        (p.first.to_string(), p.last.to_string())
    }
}

struct Profile {
    nationality: &'static str,
    birth_year: i32,
    occupation: &'static str,
    categories: [&'static str; 3],
}

const PROFILES: [Profile; 8] = [
    Profile { nationality: "American", birth_year: 1950, occupation: "novelist", categories: ["American_novelists", "20th-century_American_writers", "Writers_from_Boston"] },
    Profile { nationality: "American", birth_year: 1972, occupation: "actress", categories: ["American_film_actresses", "21st-century_American_actresses", "Actresses_from_Chicago"] },
    Profile { nationality: "British", birth_year: 1935, occupation: "singer", categories: ["English_singers", "British_pop_singers", "Musicians_from_London"] },
    Profile { nationality: "Spanish", birth_year: 1890, occupation: "painter", categories: ["Spanish_painters", "19th-century_Spanish_painters", "Artists_from_Madrid"] },
    Profile { nationality: "American", birth_year: 1964, occupation: "politician", categories: ["American_politicians", "Members_of_the_state_senate", "Lawyers_from_Denver"] },
    Profile { nationality: "Russian", birth_year: 1948, occupation: "poet", categories: ["Russian_poets", "Soviet_poets", "Writers_from_Moscow"] },
    Profile { nationality: "Canadian", birth_year: 1980, occupation: "athlete", categories: ["Canadian_athletes", "Olympic_swimmers", "Sportspeople_from_Toronto"] },
    Profile { nationality: "American", birth_year: 1925, occupation: "comedian", categories: ["American_comedians", "Stand-up_comedians", "Entertainers_from_New_York"] },
];

const TREATMENT_CATEGORIES: [&str; 4] = [
    "LGBT_writers_from_the_United_States",
    "Lesbian_actresses",
    "Gay_musicians",
    "Bisexual_artists",
];

fn people(rng: &mut ChaCha8Rng) -> Vec<Person> {
    // Verbs by English power label.
    let low: Vec<usize> = (0..20).filter(|&v| VERB_LABELS[v][0] < 1).collect();
    let high: Vec<usize> = (0..20).filter(|&v| VERB_LABELS[v][0] == 1).collect();
    let mut out = Vec::new();
    for i in 0..20 {
        let treatment = i < 8;
        let profile = &PROFILES[i % 8];
        let mut categories: Vec<String> = profile.categories.iter().map(|s| s.to_string()).collect();
        categories.push("Living_people".into());
        categories.push(format!("{}_births", profile.birth_year));
        if treatment {
            categories.push(TREATMENT_CATEGORIES[i % 4].to_string());
        } else if i >= 16 {
            // Loosely related candidates sharing a single category.
            categories.truncate(1);
            categories.push(format!("People_from_town_{i}"));
        } else {
            // Close candidates drop one category.
            categories.remove(rng.random_range(0..3));
        }
        // Treatment entries lean towards low-power verbs.
        let verb_pool = if treatment {
            let mut v = low.clone();
            v.extend(high.iter().take(4));
            v
        } else {
            let mut v = high.clone();
            v.extend(low.iter().take(2));
            v
        };
        let mut n_subject = [rng.random_range(7..11), rng.random_range(6..10), rng.random_range(6..10)];
        if i == 19 {
            // Too few mentions in Spanish: dropped by the corpus filter.
            n_subject[1] = 1;
        }
        out.push(Person {
            id: format!("p{i:02}"),
            group: if treatment { Group::Treatment } else { Group::ControlCandidate },
            first: FIRST[i],
            last: LAST[i],
            she: i % 2 == 0,
            categories,
            attributes: Attributes {
                nationality: Some(profile.nationality.to_string()),
                birth_year: if i == 13 { None } else { Some(profile.birth_year + (i as i32 % 3)) },
                occupations: vec![profile.occupation.to_string()],
            },
            n_subject,
            verb_pool,
        });
    }
    out
}

/// One token row: form, lemma, upos, head, deprel.
type Row = (String, String, &'static str, usize, &'static str);

fn conllu(sent_id: &str, rows: &[Row]) -> String {
    let text: Vec<&str> = rows.iter().map(|r| r.0.as_str()).collect();
    let mut s = format!("# sent_id = {sent_id}\n# text = {}\n", text.join(" "));
    for (i, (form, lemma, upos, head, deprel)) in rows.iter().enumerate() {
        writeln!(s, "{}\t{form}\t{lemma}\t{upos}\t_\t_\t{head}\t{deprel}\t_\t_", i + 1).unwrap();
    }
    s.push('\n');
    s
}

fn row(form: &str, lemma: &str, upos: &'static str, head: usize, deprel: &'static str) -> Row {
    (form.to_string(), lemma.to_string(), upos, head, deprel)
}

/// Appends `[det] noun` headed by `head`, returning the noun's id.
fn noun_phrase(rows: &mut Vec<Row>, li: usize, noun: &str, head: usize, deprel: &'static str) -> usize {
    if let Some(det) = DETERMINERS[li] {
        let noun_id = rows.len() + 2;
        rows.push(row(det, det, "DET", noun_id, "det"));
    }
    rows.push(row(noun, noun, "NOUN", head, deprel));
    rows.len()
}

/// Subject mention: the person does something to a noun.
fn subject_sentence(p: &Person, li: usize, verb: usize, form: u8, noun: &str) -> Vec<Row> {
    let (first, last) = names(p, li);
    let lemma = verbs(li)[verb];
    let mut rows = Vec::new();
    let verb_id = match form {
        0 => {
            rows.push(row(&first, &first, "PROPN", 3, "nsubj"));
            rows.push(row(&last, &last, "PROPN", 1, "flat"));
            3
        }
        1 => {
            rows.push(row(&last, &last, "PROPN", 2, "nsubj"));
            2
        }
        _ => {
            let pron = PRONOUNS[li][p.she as usize];
            let mut cap = pron.chars();
            let f = cap.next().unwrap();
            let shown: String = f.to_uppercase().chain(cap).collect();
            rows.push(row(&shown, pron, "PRON", 2, "nsubj"));
            2
        }
    };
    rows.push(row(&verb_form(li, lemma), lemma, "VERB", 0, "root"));
    noun_phrase(&mut rows, li, noun, verb_id, "obj");
    rows.push(row(".", ".", "PUNCT", verb_id, "punct"));
    rows
}

/// Object mention: a noun does something to the person.
fn object_sentence(p: &Person, li: usize, verb: usize, noun: &str) -> Vec<Row> {
    let (first, last) = names(p, li);
    let lemma = verbs(li)[verb];
    let mut rows = Vec::new();
    let subj_len = if DETERMINERS[li].is_some() { 2 } else { 1 };
    let verb_id = subj_len + 1;
    noun_phrase(&mut rows, li, noun, verb_id, "nsubj");
    rows.push(row(&verb_form(li, lemma), lemma, "VERB", 0, "root"));
    rows.push(row(&first, &first, "PROPN", verb_id, "obj"));
    rows.push(row(&last, &last, "PROPN", verb_id + 1, "flat"));
    rows.push(row(".", ".", "PUNCT", verb_id, "punct"));
    rows
}

/// No mention of the person.
fn filler_sentence(li: usize, verb: usize, a: &str, b: &str) -> Vec<Row> {
    let lemma = verbs(li)[verb];
    let mut rows = Vec::new();
    let verb_id = if DETERMINERS[li].is_some() { 3 } else { 2 };
    noun_phrase(&mut rows, li, a, verb_id, "nsubj");
    rows.push(row(&verb_form(li, lemma), lemma, "VERB", 0, "root"));
    noun_phrase(&mut rows, li, b, verb_id, "obj");
    rows.push(row(".", ".", "PUNCT", verb_id, "punct"));
    rows
}

fn corpus(rng: &mut ChaCha8Rng, out: &Path, langs: &[Lang]) {
    let people = people(rng);
    let mut dump = String::new();
    let mut features: Vec<Vec<(String, Vec<f32>)>> = vec![Vec::new(); 3];
    for p in &people {
        for (li, lang) in LANGS.iter().enumerate() {
            let mut sentences: Vec<Vec<Row>> = Vec::new();
            for k in 0..p.n_subject[li] {
                let verb = *p.verb_pool.choose(rng).unwrap();
                let noun = NOUNS[li][rng.random_range(0..8)];
                sentences.push(subject_sentence(p, li, verb, (k % 3) as u8, noun));
            }
            for _ in 0..2 {
                let verb = rng.random_range(0..20);
                sentences.push(object_sentence(p, li, verb, NOUNS[li][rng.random_range(0..8)]));
                let (a, b) = (NOUNS[li][rng.random_range(0..8)], NOUNS[li][rng.random_range(0..8)]);
                sentences.push(filler_sentence(li, rng.random_range(0..20), a, b));
            }
            sentences.shuffle(rng);
            let mut text = String::new();
            for (si, rows) in sentences.iter().enumerate() {
                text.push_str(&conllu(&format!("{}-{lang}-{si}", p.id), rows));
                for (ti, r) in rows.iter().enumerate() {
                    if r.2 == "VERB" {
                        let verb = verbs(li).iter().position(|v| *v == r.1).unwrap();
                        let key = format!("{}|{lang}|{si}|{ti}", p.id);
                        features[li].push((key, embed(rng, langs[li].labels[verb], 0.6)));
                    }
                }
            }
            let (first, last) = names(p, li);
            let full = format!("{first} {last}");
            let first_line = li == 0;
            let rec = DumpRecord {
                person_id: p.id.clone(),
                language: Language::new(lang).unwrap(),
                group: p.group,
                names: vec![full.clone()],
                title: Some(full.clone()),
                url: Some(format!("https://{lang}.wikipedia.org/wiki/{}", full.replace(' ', "_"))),
                categories: if first_line { p.categories.clone() } else { Vec::new() },
                attributes: first_line.then(|| p.attributes.clone()),
                conllu: text,
            };
            dump.push_str(&serde_json::to_string(&rec).unwrap());
            dump.push('\n');
        }
    }
    std::fs::create_dir_all(out.join("corpus")).unwrap();
    std::fs::write(out.join("corpus/dump.jsonl"), dump).unwrap();
    for (li, lang) in LANGS.iter().enumerate() {
        let f = feature_file(lang, std::mem::take(&mut features[li]), "corpus");
        write_features(&f, &out.join(format!("features/corpus_{lang}.caafeat"))).unwrap();
    }
}

const EXCLUSIONS: &str = "# Categories that define the treatment group; never used for matching.
~lgbt
~lesbian
~gay
~bisexual
~transgender
~queer
";

const CONFIG: &str = r#"seed = 7
languages = ["en", "es", "ru"]
output_dir = "caa-out"

[paths]
annotations = "annotations.csv"
features = ["features/instances_en.caafeat", "features/instances_es.caafeat", "features/instances_ru.caafeat"]
corpus_dump = "corpus/dump.jsonl"
corpus_features = ["features/corpus_en.caafeat", "features/corpus_es.caafeat", "features/corpus_ru.caafeat"]
exclusion_list = "exclusions.txt"

[paths.translated_features]
es = "features/translated_es.caafeat"
ru = "features/translated_ru.caafeat"

[paths.translation_tables]
es = "translations/es_en.csv"
ru = "translations/ru_en.csv"

[classifier]
weight_values = [0.5, 1.0, 2.0]

[scoring]
# The fixture corpus is tiny; real runs keep the default.
min_verbs = 20
"#;

fn main() {
    let out: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    std::fs::create_dir_all(&out).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);

    // Spanish and Russian labels mostly agree with English.
    let langs: Vec<Lang> = (0..3)
        .map(|li| Lang {
            labels: VERB_LABELS
                .iter()
                .map(|l| {
                    let mut l = *l;
                    if li > 0 {
                        for x in l.iter_mut() {
                            if rng.random_bool(0.1) {
                                *x = other_value(&mut rng, *x);
                            }
                        }
                    }
                    l
                })
                .collect(),
        })
        .collect();

    annotations(&mut rng, &out, &langs);
    translation_tables(&out);
    corpus(&mut rng, &out, &langs);
    std::fs::write(out.join("exclusions.txt"), EXCLUSIONS).unwrap();
    std::fs::write(out.join("config.toml"), CONFIG).unwrap();
    println!("fixtures written to {}", out.display());
}

//! Straight-line reference of the valence rule set, used as a test oracle.
//! It parses the lexicon files itself and shares no code with the engine.

use std::collections::{HashMap, HashSet};
use std::path::Path;

pub struct RefLexicon {
    valence: HashMap<String, f64>,
    booster: HashMap<String, f64>,
    negator: HashSet<String>,
}

fn body_lines(text: &str) -> Vec<&str> {
    text.lines()
        .map(|l| l.trim_end_matches('\r'))
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .collect()
}

impl RefLexicon {
    pub fn from_dir(dir: &Path) -> RefLexicon {
        let read = |name: &str| std::fs::read_to_string(dir.join(name)).unwrap();
        let mut valence = HashMap::new();
        for line in body_lines(&read("vader_lexicon.txt")) {
            let parts: Vec<&str> = line.split('\t').collect();
            valence.insert(parts[0].to_lowercase(), parts[1].trim().parse::<f64>().unwrap());
        }
        let mut booster = HashMap::new();
        for line in body_lines(&read("boosters.txt")) {
            let parts: Vec<&str> = line.split('\t').collect();
            let inc = if parts.len() > 1 { parts[1].trim().parse().unwrap() } else { 0.293 };
            booster.insert(parts[0].trim().to_lowercase(), inc);
        }
        let negator = body_lines(&read("negators.txt"))
            .into_iter()
            .map(|l| l.trim().to_lowercase())
            .collect();
        RefLexicon { valence, booster, negator }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefScores {
    pub neg: f64,
    pub neu: f64,
    pub pos: f64,
    pub compound: f64,
}

fn punct(c: char) -> bool {
    if c.is_ascii() {
        return c.is_ascii_punctuation();
    }
    let u = c as u32;
    [0xA1, 0xA7, 0xAB, 0xB6, 0xB7, 0xBB, 0xBF].contains(&u)
        || (0x2010..=0x2027).contains(&u)
        || (0x2030..=0x205E).contains(&u)
        || (0x3001..=0x3003).contains(&u)
        || (0xFF01..=0xFF0F).contains(&u)
}

fn words(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for piece in text.split_whitespace() {
        let chars: Vec<char> = piece.chars().collect();
        let mut a = 0;
        let mut b = chars.len();
        while a < b && punct(chars[a]) {
            a += 1;
        }
        while b > a && punct(chars[b - 1]) {
            b -= 1;
        }
        if a == b {
            out.push(piece.to_string());
        } else {
            out.push(chars[a..b].iter().collect());
        }
    }
    out
}

fn shouting(w: &str) -> bool {
    w.chars().any(|c| c.is_uppercase()) && !w.chars().any(|c| c.is_lowercase())
}

pub fn reference_score(lex: &RefLexicon, text: &str) -> RefScores {
    let zero = RefScores { neg: 0.0, neu: 0.0, pos: 0.0, compound: 0.0 };
    let ws = words(text);
    let low: Vec<String> = ws.iter().map(|w| w.to_lowercase()).collect();
    let n_caps = ws.iter().filter(|w| shouting(w)).count();
    let mixed_caps = n_caps != 0 && n_caps != ws.len();

    // pass 1: base valence of lexicon hits (boosters never score themselves)
    let mut val: Vec<Option<f64>> = low
        .iter()
        .map(|w| if lex.booster.contains_key(w) { None } else { lex.valence.get(w).copied() })
        .collect();
    if val.iter().all(Option::is_none) {
        return zero;
    }

    // pass 2: modifiers, caps, negation, in that order, per hit
    for i in 0..ws.len() {
        let Some(mut v) = val[i] else { continue };
        for back in 1..=3usize {
            if back > i {
                break;
            }
            let j = i - back;
            if let Some(&inc) = lex.booster.get(&low[j]) {
                let scale = [1.0, 0.95, 0.9][back - 1];
                let mut step = if v < 0.0 { -inc } else { inc };
                if mixed_caps && shouting(&ws[j]) {
                    step += if v > 0.0 { 0.733 } else { -0.733 };
                }
                v += step * scale;
            }
        }
        if mixed_caps && shouting(&ws[i]) {
            v += if v > 0.0 { 0.733 } else { -0.733 };
        }
        let start = i.saturating_sub(3);
        if (start..i).any(|j| lex.negator.contains(&low[j])) {
            v *= -0.74;
        }
        val[i] = Some(v);
    }
    let mut s: Vec<f64> = val.iter().map(|v| v.unwrap_or(0.0)).collect();

    // pass 3: contrastive "but"
    if let Some(b) = low.iter().position(|w| w == "but") {
        for (k, x) in s.iter_mut().enumerate() {
            if k < b {
                *x *= 0.5;
            }
            if k > b {
                *x *= 1.5;
            }
        }
    }

    // pass 4: punctuation emphasis
    let bangs = text.chars().filter(|&c| c == '!').count();
    let qs = text.chars().filter(|&c| c == '?').count();
    let mut emph = 0.292 * bangs.min(3) as f64;
    if qs > 1 {
        emph += if qs <= 3 { 0.18 * qs as f64 } else { 0.96 };
    }

    let raw: f64 = s.iter().sum();
    let total = if raw > 0.0 {
        raw + emph
    } else if raw < 0.0 {
        raw - emph
    } else {
        raw
    };
    let mut compound = total / (total * total + 15.0).sqrt();
    compound = compound.max(-1.0).min(1.0);

    let pos: f64 = s.iter().filter(|x| **x > 0.0).map(|x| x + 1.0).sum();
    let neg: f64 = s.iter().filter(|x| **x < 0.0).map(|x| x - 1.0).sum();
    let neu = s.iter().filter(|x| **x == 0.0).count() as f64;
    let (mut pos, mut neg) = (pos, neg);
    if pos > -neg {
        pos += emph;
    } else if pos < -neg {
        neg -= emph;
    }
    let total_mass = pos - neg + neu;
    RefScores {
        neg: -neg / total_mass,
        neu: neu / total_mass,
        pos: pos / total_mass,
        compound,
    }
}

//! Porter stemmer, the classic five-step suffix stripper.
//!
//! Operates on lowercase ASCII words. Words shorter than three letters are
//! returned unchanged, matching the reference behaviour.

/// True when the byte at `i` acts as a consonant.
///
/// 'y' is a consonant at the start of a word or after a vowel, and a vowel
/// after a consonant.
fn is_consonant(word: &[u8], i: usize) -> bool {
    match word[i] {
        b'a' | b'e' | b'i' | b'o' | b'u' => false,
        b'y' => i == 0 || !is_consonant(word, i - 1),
        _ => true,
    }
}

/// The measure m of a stem: the number of vowel-consonant sequences.
fn measure(word: &[u8]) -> usize {
    let mut m = 0;
    let mut i = 0;
    let n = word.len();
    // skip initial consonants
    while i < n && is_consonant(word, i) {
        i += 1;
    }
    loop {
        // vowel run
        while i < n && !is_consonant(word, i) {
            i += 1;
        }
        if i == n {
            return m;
        }
        // consonant run closes one VC
        while i < n && is_consonant(word, i) {
            i += 1;
        }
        m += 1;
    }
}

fn contains_vowel(word: &[u8]) -> bool {
    (0..word.len()).any(|i| !is_consonant(word, i))
}

fn ends_double_consonant(word: &[u8]) -> bool {
    let n = word.len();
    n >= 2 && word[n - 1] == word[n - 2] && is_consonant(word, n - 1)
}

/// consonant-vowel-consonant ending where the final consonant is not w, x or y.
fn ends_cvc(word: &[u8]) -> bool {
    let n = word.len();
    n >= 3
        && is_consonant(word, n - 3)
        && !is_consonant(word, n - 2)
        && is_consonant(word, n - 1)
        && !matches!(word[n - 1], b'w' | b'x' | b'y')
}

struct Stem {
    word: Vec<u8>,
}

impl Stem {
    fn ends_with(&self, suffix: &str) -> bool {
        self.word.ends_with(suffix.as_bytes())
    }

    fn stem_before(&self, suffix: &str) -> &[u8] {
        &self.word[..self.word.len() - suffix.len()]
    }

    fn replace(&mut self, suffix: &str, with: &str) {
        let at = self.word.len() - suffix.len();
        self.word.truncate(at);
        self.word.extend_from_slice(with.as_bytes());
    }

    /// Replace `suffix` by `with` when the remaining stem has measure > m.
    fn replace_if_measure(&mut self, suffix: &str, with: &str, m: usize) -> bool {
        if self.ends_with(suffix) && measure(self.stem_before(suffix)) > m {
            self.replace(suffix, with);
            true
        } else {
            false
        }
    }

    fn step_1a(&mut self) {
        if self.ends_with("sses") {
            self.replace("sses", "ss");
        } else if self.ends_with("ies") {
            self.replace("ies", "i");
        } else if self.ends_with("ss") {
            // unchanged
        } else if self.ends_with("s") {
            self.replace("s", "");
        }
    }

    fn step_1b(&mut self) {
        if self.ends_with("eed") {
            if measure(self.stem_before("eed")) > 0 {
                self.replace("eed", "ee");
            }
            return;
        }
        let removed = if self.ends_with("ed") && contains_vowel(self.stem_before("ed")) {
            self.replace("ed", "");
            true
        } else if self.ends_with("ing") && contains_vowel(self.stem_before("ing")) {
            self.replace("ing", "");
            true
        } else {
            false
        };
        if !removed {
            return;
        }
        if self.ends_with("at") {
            self.replace("at", "ate");
        } else if self.ends_with("bl") {
            self.replace("bl", "ble");
        } else if self.ends_with("iz") {
            self.replace("iz", "ize");
        } else if ends_double_consonant(&self.word)
            && !matches!(self.word[self.word.len() - 1], b'l' | b's' | b'z')
        {
            self.word.truncate(self.word.len() - 1);
        } else if measure(&self.word) == 1 && ends_cvc(&self.word) {
            self.word.push(b'e');
        }
    }

    fn step_1c(&mut self) {
        if self.ends_with("y") && contains_vowel(self.stem_before("y")) {
            self.replace("y", "i");
        }
    }

    fn step_2(&mut self) {
        // ordered by penultimate letter, longest first within a letter
        const RULES: &[(&str, &str)] = &[
            ("ational", "ate"),
            ("tional", "tion"),
            ("enci", "ence"),
            ("anci", "ance"),
            ("izer", "ize"),
            ("abli", "able"),
            ("alli", "al"),
            ("entli", "ent"),
            ("eli", "e"),
            ("ousli", "ous"),
            ("ization", "ize"),
            ("ation", "ate"),
            ("ator", "ate"),
            ("alism", "al"),
            ("iveness", "ive"),
            ("fulness", "ful"),
            ("ousness", "ous"),
            ("aliti", "al"),
            ("iviti", "ive"),
            ("biliti", "ble"),
        ];
        for (suffix, with) in RULES {
            if self.ends_with(suffix) {
                self.replace_if_measure(suffix, with, 0);
                return;
            }
        }
    }

    fn step_3(&mut self) {
        const RULES: &[(&str, &str)] = &[
            ("icate", "ic"),
            ("ative", ""),
            ("alize", "al"),
            ("iciti", "ic"),
            ("ical", "ic"),
            ("ful", ""),
            ("ness", ""),
        ];
        for (suffix, with) in RULES {
            if self.ends_with(suffix) {
                self.replace_if_measure(suffix, with, 0);
                return;
            }
        }
    }

    fn step_4(&mut self) {
        const SUFFIXES: &[&str] = &[
            "ement", "ance", "ence", "able", "ible", "ment", "ant", "ent", "ion", "ism", "ate",
            "iti", "ous", "ive", "ize", "al", "er", "ic", "ou",
        ];
        for suffix in SUFFIXES {
            if !self.ends_with(suffix) {
                continue;
            }
            let stem = self.stem_before(suffix);
            if measure(stem) > 1 {
                // "ion" only drops after s or t
                if *suffix == "ion" && !matches!(stem.last(), Some(b's') | Some(b't')) {
                    return;
                }
                self.replace(suffix, "");
            }
            return;
        }
    }

    fn step_5a(&mut self) {
        if !self.ends_with("e") {
            return;
        }
        let stem = self.stem_before("e");
        let m = measure(stem);
        if m > 1 || (m == 1 && !ends_cvc(stem)) {
            self.replace("e", "");
        }
    }

    fn step_5b(&mut self) {
        if measure(&self.word) > 1
            && ends_double_consonant(&self.word)
            && self.word.last() == Some(&b'l')
        {
            self.word.truncate(self.word.len() - 1);
        }
    }
}

/// Stem one lowercase ASCII-alphabetic word.
///
/// Inputs containing anything but `a..z` are returned unchanged, as are
/// words of one or two letters.
pub fn stem(word: &str) -> String {
    if word.len() <= 2 || !word.bytes().all(|b| b.is_ascii_lowercase()) {
        return word.to_string();
    }
    let mut s = Stem {
        word: word.as_bytes().to_vec(),
    };
    s.step_1a();
    s.step_1b();
    s.step_1c();
    s.step_2();
    s.step_3();
    s.step_4();
    s.step_5a();
    s.step_5b();
    String::from_utf8(s.word).expect("ascii transforms only")
}

//! Character scanner shared by the AVM, atom and lexicon readers.

/// Position-tracking cursor over UTF-8 text. `#` starts a line comment
/// unless it is immediately followed by a digit (a re-entrancy tag).
#[derive(Debug, Clone)]
pub(crate) struct Scanner<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Scanner<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        Scanner {
            text,
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    pub(crate) fn position(&self) -> (usize, usize) {
        (self.line, self.col)
    }

    pub(crate) fn offset(&self) -> usize {
        self.pos
    }

    /// Advances to byte offset `pos`, which must not lie behind the cursor.
    pub(crate) fn skip_to(&mut self, pos: usize) {
        while self.pos < pos && self.bump().is_some() {}
    }

    pub(crate) fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    pub(crate) fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    pub(crate) fn peek2(&self) -> Option<char> {
        let mut it = self.rest().chars();
        it.next();
        it.next()
    }

    pub(crate) fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    pub(crate) fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c == '#' && !self.peek2().is_some_and(|d| d.is_ascii_digit()) {
                while self.peek().is_some_and(|c| c != '\n') {
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    pub(crate) fn at_end(&mut self) -> bool {
        self.skip_trivia();
        self.pos >= self.text.len()
    }

    /// Skips trivia, then consumes `c` if it is next.
    pub(crate) fn eat(&mut self, c: char) -> bool {
        self.skip_trivia();
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub(crate) fn eat_str(&mut self, s: &str) -> bool {
        self.skip_trivia();
        if self.rest().starts_with(s) {
            for _ in s.chars() {
                self.bump();
            }
            true
        } else {
            false
        }
    }

    /// Consumes a run of identifier characters (`[A-Za-z0-9_-]`). Returns an
    /// empty string when none follow.
    pub(crate) fn word(&mut self) -> &'a str {
        self.skip_trivia();
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            self.bump();
        }
        &self.text[start..self.pos]
    }

    pub(crate) fn digits(&mut self) -> &'a str {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
        }
        &self.text[start..self.pos]
    }

    /// A double-quoted string without escapes; `None` if unterminated.
    pub(crate) fn quoted(&mut self) -> Option<&'a str> {
        self.skip_trivia();
        if self.peek() != Some('"') {
            return None;
        }
        self.bump();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c == '"' {
                let s = &self.text[start..self.pos];
                self.bump();
                return Some(s);
            }
            self.bump();
        }
        None
    }
}

use std::fmt::Display;
use std::io::{self, Write};

/// `key = value` lines, one per call, in call order.
pub struct Kv<'a> {
    w: &'a mut dyn Write,
}

impl<'a> Kv<'a> {
    pub fn new(w: &'a mut dyn Write) -> Kv<'a> {
        Kv { w }
    }

    pub fn put(&mut self, key: impl Display, value: impl Display) -> io::Result<()> {
        writeln!(self.w, "{key} = {value}")
    }

    pub fn line(&mut self, text: impl Display) -> io::Result<()> {
        writeln!(self.w, "{text}")
    }
}

// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! OpenQASM 2 subset: register declarations, gate applications, `measure`,
//! `reset` and `barrier`. Gate definitions and classical control are rejected.

use std::collections::HashMap;
use std::fmt::Write;

use super::{check_against_registry, CircuitError, GateRegistry, Instruction, InstructionKind, QuantumCircuit};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Str,
    Semi,
    Comma,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Arrow,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    EqEq,
    LBrace,
    RBrace,
    Other(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> CircuitError {
    CircuitError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Token>, CircuitError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let mut push = |tok: Tok, width: usize, i: &mut usize, col: &mut usize| {
            out.push(Token { tok, line: tl, column: tc });
            *i += width;
            *col += width;
        };
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(word),
                line: tl,
                column: tc,
            });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let lit: String = chars[start..i].iter().collect();
            let value = lit
                .parse::<f64>()
                .map_err(|_| syntax(tl, tc, format!("malformed number '{lit}'")))?;
            col += i - start;
            out.push(Token {
                tok: Tok::Number(value),
                line: tl,
                column: tc,
            });
            continue;
        }
        if c == '"' {
            let start = i;
            i += 1;
            while i < chars.len() && chars[i] != '"' && chars[i] != '\n' {
                i += 1;
            }
            if i >= chars.len() || chars[i] != '"' {
                return Err(syntax(tl, tc, "unterminated string"));
            }
            i += 1;
            col += i - start;
            out.push(Token {
                tok: Tok::Str,
                line: tl,
                column: tc,
            });
            continue;
        }
        match c {
            ';' => push(Tok::Semi, 1, &mut i, &mut col),
            ',' => push(Tok::Comma, 1, &mut i, &mut col),
            '[' => push(Tok::LBracket, 1, &mut i, &mut col),
            ']' => push(Tok::RBracket, 1, &mut i, &mut col),
            '(' => push(Tok::LParen, 1, &mut i, &mut col),
            ')' => push(Tok::RParen, 1, &mut i, &mut col),
            '{' => push(Tok::LBrace, 1, &mut i, &mut col),
            '}' => push(Tok::RBrace, 1, &mut i, &mut col),
            '+' => push(Tok::Plus, 1, &mut i, &mut col),
            '*' => push(Tok::Star, 1, &mut i, &mut col),
            '/' => push(Tok::Slash, 1, &mut i, &mut col),
            '^' => push(Tok::Caret, 1, &mut i, &mut col),
            '-' if chars.get(i + 1) == Some(&'>') => push(Tok::Arrow, 2, &mut i, &mut col),
            '-' => push(Tok::Minus, 1, &mut i, &mut col),
            '=' if chars.get(i + 1) == Some(&'=') => push(Tok::EqEq, 2, &mut i, &mut col),
            other => push(Tok::Other(other), 1, &mut i, &mut col),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
struct Register {
    offset: usize,
    size: usize,
}

/// One operand: a single bit, or a whole register (broadcast).
#[derive(Debug, Clone)]
enum Operand {
    Bit(usize),
    Reg(Vec<usize>),
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    registry: &'a GateRegistry,
    qregs: HashMap<String, Register>,
    cregs: HashMap<String, Register>,
    num_qubits: usize,
    num_clbits: usize,
    body: Vec<Instruction>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn end_pos(&self) -> (usize, usize) {
        self.toks.last().map(|t| (t.line, t.column + 1)).unwrap_or((1, 1))
    }

    fn next(&mut self) -> Result<Token, CircuitError> {
        match self.toks.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.clone())
            }
            None => {
                let (l, c) = self.end_pos();
                Err(syntax(l, c, "unexpected end of input"))
            }
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Token, CircuitError> {
        let t = self.next()?;
        if t.tok == want {
            Ok(t)
        } else {
            Err(syntax(t.line, t.column, format!("expected {what}, found {:?}", t.tok)))
        }
    }

    fn ident(&mut self) -> Result<(String, Token), CircuitError> {
        let t = self.next()?;
        match &t.tok {
            Tok::Ident(s) => Ok((s.clone(), t)),
            other => Err(syntax(t.line, t.column, format!("expected identifier, found {other:?}"))),
        }
    }

    fn size(&mut self) -> Result<usize, CircuitError> {
        let t = self.next()?;
        match t.tok {
            Tok::Number(v) if v >= 0.0 && v.fract() == 0.0 => Ok(v as usize),
            _ => Err(syntax(t.line, t.column, "expected a non-negative integer")),
        }
    }

    fn run(&mut self) -> Result<(), CircuitError> {
        if let Some(Token { tok: Tok::Ident(w), .. }) = self.peek() {
            if w == "OPENQASM" {
                self.pos += 1;
                let t = self.next()?;
                if !matches!(t.tok, Tok::Number(_)) {
                    return Err(syntax(t.line, t.column, "expected version number"));
                }
                self.expect(Tok::Semi, "';'")?;
            }
        }
        while self.peek().is_some() {
            self.statement()?;
        }
        Ok(())
    }

    fn statement(&mut self) -> Result<(), CircuitError> {
        let (word, tok) = self.ident()?;
        match word.as_str() {
            "OPENQASM" => Err(syntax(tok.line, tok.column, "OPENQASM header must come first")),
            "include" => {
                self.expect(Tok::Str, "file name")?;
                self.expect(Tok::Semi, "';'")?;
                Ok(())
            }
            "qreg" | "creg" => self.declaration(word == "qreg", &tok),
            "gate" | "opaque" => Err(CircuitError::Unsupported(format!(
                "{}:{}: custom gate definitions",
                tok.line, tok.column
            ))),
            "if" | "while" | "for" => Err(CircuitError::Unsupported(format!(
                "{}:{}: classical control flow",
                tok.line, tok.column
            ))),
            "measure" => self.measure(),
            "reset" => {
                let ops = self.operand(true)?;
                self.expect(Tok::Semi, "';'")?;
                for q in expand(&ops) {
                    self.body.push(Instruction::reset(q));
                }
                Ok(())
            }
            "barrier" => {
                let mut qubits = Vec::new();
                loop {
                    match self.operand(true)? {
                        Operand::Bit(q) => qubits.push(q),
                        Operand::Reg(r) => qubits.extend(r),
                    }
                    let t = self.next()?;
                    match t.tok {
                        Tok::Comma => continue,
                        Tok::Semi => break,
                        _ => return Err(syntax(t.line, t.column, "expected ',' or ';'")),
                    }
                }
                let mut seen = qubits.clone();
                seen.sort_unstable();
                seen.dedup();
                if seen.len() != qubits.len() {
                    return Err(syntax(tok.line, tok.column, "barrier repeats a qubit"));
                }
                self.body.push(Instruction::barrier(&qubits));
                Ok(())
            }
            _ => self.gate(word, &tok),
        }
    }

    fn declaration(&mut self, quantum: bool, at: &Token) -> Result<(), CircuitError> {
        let (name, _) = self.ident()?;
        self.expect(Tok::LBracket, "'['")?;
        let size = self.size()?;
        self.expect(Tok::RBracket, "']'")?;
        self.expect(Tok::Semi, "';'")?;
        if self.qregs.contains_key(&name) || self.cregs.contains_key(&name) {
            return Err(syntax(at.line, at.column, format!("register '{name}' redeclared")));
        }
        if quantum {
            self.qregs.insert(name, Register { offset: self.num_qubits, size });
            self.num_qubits += size;
        } else {
            self.cregs.insert(name, Register { offset: self.num_clbits, size });
            self.num_clbits += size;
        }
        Ok(())
    }

    fn operand(&mut self, quantum: bool) -> Result<Operand, CircuitError> {
        let (name, tok) = self.ident()?;
        let reg = if quantum { self.qregs.get(&name) } else { self.cregs.get(&name) };
        let reg = *reg.ok_or_else(|| {
            syntax(
                tok.line,
                tok.column,
                format!("undeclared {} register '{name}'", if quantum { "quantum" } else { "classical" }),
            )
        })?;
        if matches!(self.peek(), Some(Token { tok: Tok::LBracket, .. })) {
            self.pos += 1;
            let idx = self.size()?;
            self.expect(Tok::RBracket, "']'")?;
            if idx >= reg.size {
                return Err(CircuitError::IndexOutOfRange {
                    what: if quantum { "qubit" } else { "clbit" },
                    index: idx,
                    size: reg.size,
                });
            }
            Ok(Operand::Bit(reg.offset + idx))
        } else {
            Ok(Operand::Reg((reg.offset..reg.offset + reg.size).collect()))
        }
    }

    fn measure(&mut self) -> Result<(), CircuitError> {
        let q = self.operand(true)?;
        let arrow = self.expect(Tok::Arrow, "'->'")?;
        let c = self.operand(false)?;
        self.expect(Tok::Semi, "';'")?;
        match (q, c) {
            (Operand::Bit(q), Operand::Bit(c)) => self.body.push(Instruction::measure(q, c)),
            (Operand::Reg(qs), Operand::Reg(cs)) if qs.len() == cs.len() => {
                for (q, c) in qs.into_iter().zip(cs) {
                    self.body.push(Instruction::measure(q, c));
                }
            }
            _ => return Err(syntax(arrow.line, arrow.column, "measure operands differ in size")),
        }
        Ok(())
    }

    fn gate(&mut self, name: String, at: &Token) -> Result<(), CircuitError> {
        let mut params = Vec::new();
        if matches!(self.peek(), Some(Token { tok: Tok::LParen, .. })) {
            self.pos += 1;
            if !matches!(self.peek(), Some(Token { tok: Tok::RParen, .. })) {
                loop {
                    params.push(self.expr()?);
                    let t = self.next()?;
                    match t.tok {
                        Tok::Comma => continue,
                        Tok::RParen => break,
                        _ => return Err(syntax(t.line, t.column, "expected ',' or ')'")),
                    }
                }
            } else {
                self.pos += 1;
            }
        }
        let mut args = Vec::new();
        loop {
            args.push(self.operand(true)?);
            let t = self.next()?;
            match t.tok {
                Tok::Comma => continue,
                Tok::Semi => break,
                _ => return Err(syntax(t.line, t.column, "expected ',' or ';'")),
            }
        }
        let width = args
            .iter()
            .filter_map(|a| match a {
                Operand::Reg(r) => Some(r.len()),
                Operand::Bit(_) => None,
            })
            .try_fold(None::<usize>, |acc, n| match acc {
                Some(m) if m != n => Err(()),
                _ => Ok(Some(n)),
            })
            .map_err(|_| syntax(at.line, at.column, "broadcast registers differ in size"))?;
        let rounds = width.unwrap_or(1);
        for k in 0..rounds {
            let qubits: Vec<usize> = args
                .iter()
                .map(|a| match a {
                    Operand::Bit(q) => *q,
                    Operand::Reg(r) => r[k],
                })
                .collect();
            let instr = Instruction {
                kind: InstructionKind::Gate,
                name: name.clone(),
                qubits,
                params: params.clone(),
                clbits: Vec::new(),
            };
            check_against_registry(&instr, self.registry, at.line, at.column)?;
            for (i, q) in instr.qubits.iter().enumerate() {
                if instr.qubits[..i].contains(q) {
                    return Err(CircuitError::DuplicateQubit {
                        name: instr.name.clone(),
                        qubit: *q,
                    });
                }
            }
            self.body.push(instr);
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<f64, CircuitError> {
        let mut acc = self.term()?;
        loop {
            match self.peek().map(|t| &t.tok) {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc += self.term()?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc -= self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<f64, CircuitError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek().map(|t| &t.tok) {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc *= self.factor()?;
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    acc /= self.factor()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<f64, CircuitError> {
        match self.peek().map(|t| &t.tok) {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(-self.factor()?)
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.factor()
            }
            _ => {
                let base = self.primary()?;
                if matches!(self.peek(), Some(Token { tok: Tok::Caret, .. })) {
                    self.pos += 1;
                    Ok(base.powf(self.factor()?))
                } else {
                    Ok(base)
                }
            }
        }
    }

    fn primary(&mut self) -> Result<f64, CircuitError> {
        let t = self.next()?;
        let value = match &t.tok {
            Tok::Number(v) => *v,
            Tok::LParen => {
                let v = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                v
            }
            Tok::Ident(w) if w == "pi" => std::f64::consts::PI,
            Tok::Ident(w) => {
                let f: fn(f64) -> f64 = match w.as_str() {
                    "sin" => f64::sin,
                    "cos" => f64::cos,
                    "tan" => f64::tan,
                    "exp" => f64::exp,
                    "ln" => f64::ln,
                    "sqrt" => f64::sqrt,
                    _ => return Err(syntax(t.line, t.column, format!("unknown symbol '{w}' in expression"))),
                };
                self.expect(Tok::LParen, "'('")?;
                let v = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                f(v)
            }
            other => return Err(syntax(t.line, t.column, format!("unexpected {other:?} in expression"))),
        };
        if !value.is_finite() {
            return Err(syntax(t.line, t.column, "expression is not finite"));
        }
        Ok(value)
    }
}

fn expand(op: &Operand) -> Vec<usize> {
    match op {
        Operand::Bit(q) => vec![*q],
        Operand::Reg(r) => r.clone(),
    }
}

/// Parse QASM-subset text with the default gate registry.
pub fn parse_circuit(text: &str) -> Result<QuantumCircuit, CircuitError> {
    parse_circuit_with(text, &GateRegistry::default())
}

/// Parse QASM-subset text, validating gates against `registry`.
pub fn parse_circuit_with(text: &str, registry: &GateRegistry) -> Result<QuantumCircuit, CircuitError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        registry,
        qregs: HashMap::new(),
        cregs: HashMap::new(),
        num_qubits: 0,
        num_clbits: 0,
        body: Vec::new(),
    };
    p.run()?;
    let mut circuit = QuantumCircuit::new(p.num_qubits, p.num_clbits);
    for instr in p.body {
        circuit.push(instr)?;
    }
    Ok(circuit)
}

pub(super) fn to_qasm(c: &QuantumCircuit) -> String {
    let mut out = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    if c.num_qubits() > 0 {
        let _ = writeln!(out, "qreg q[{}];", c.num_qubits());
    }
    if c.num_clbits() > 0 {
        let _ = writeln!(out, "creg c[{}];", c.num_clbits());
    }
    for instr in c.instructions() {
        let qargs = instr
            .qubits
            .iter()
            .map(|q| format!("q[{q}]"))
            .collect::<Vec<_>>()
            .join(",");
        match instr.kind {
            InstructionKind::Measure => {
                let _ = writeln!(out, "measure {qargs} -> c[{}];", instr.clbits[0]);
            }
            _ if instr.params.is_empty() => {
                let _ = writeln!(out, "{} {qargs};", instr.name);
            }
            _ => {
                let params = instr.params.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(",");
                let _ = writeln!(out, "{}({params}) {qargs};", instr.name);
            }
        }
    }
    out
}

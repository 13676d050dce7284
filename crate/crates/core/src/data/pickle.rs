//! Minimal Python pickle reader and writer.
//!
//! The Planetoid files are pickles of numpy arrays, scipy CSR matrices and
//! a `collections.defaultdict`. Loading them needs more than plain data
//! pickles: class lookups (`GLOBAL`), constructor calls (`REDUCE`,
//! `NEWOBJ`) and `__setstate__` (`BUILD`). Nothing is executed here; those
//! opcodes produce [`Object`] values recording the class, the constructor
//! arguments and the state, which the Planetoid loader then interprets.
//!
//! Protocols 0 through 5 are accepted, including Python 2 pickles whose
//! byte strings arrive as `BINSTRING`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

/// A decoded pickle value.
#[derive(Clone, Debug)]
pub enum Value {
    None,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    Bytes(Rc<[u8]>),
    Tuple(Vec<Value>),
    List(Rc<RefCell<Vec<Value>>>),
    Dict(Rc<RefCell<Vec<(Value, Value)>>>),
    Set(Rc<RefCell<Vec<Value>>>),
    Global { module: String, name: String },
    Object(Rc<RefCell<Object>>),
}

/// An instance built by a constructor opcode.
#[derive(Clone, Debug)]
pub struct Object {
    /// The callable or class, normally a [`Value::Global`].
    pub class: Value,
    pub args: Vec<Value>,
    pub state: Option<Value>,
    /// Items added with `APPEND(S)` (list subclasses).
    pub list_items: Vec<Value>,
    /// Items added with `SETITEM(S)` (dict subclasses like `defaultdict`).
    pub dict_items: Vec<(Value, Value)>,
}

impl Value {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            Value::Bool(b) => Some(*b as i64),
            _ => None,
        }
    }

    /// Text content of `Str` or of a (Python 2) byte string.
    pub fn as_str(&self) -> Option<String> {
        match self {
            Value::Str(s) => Some(s.clone()),
            Value::Bytes(b) => Some(b.iter().map(|&c| c as char).collect()),
            _ => None,
        }
    }

    pub fn as_bytes(&self) -> Option<Rc<[u8]>> {
        match self {
            Value::Bytes(b) => Some(Rc::clone(b)),
            // Python 3 unpickling a py2 str with encoding='latin1' yields str
            Value::Str(s) => Some(s.chars().map(|c| c as u32 as u8).collect::<Vec<_>>().into()),
            _ => None,
        }
    }

    /// Elements of a tuple or list.
    pub fn as_seq(&self) -> Option<Vec<Value>> {
        match self {
            Value::Tuple(v) => Some(v.clone()),
            Value::List(v) => Some(v.borrow().clone()),
            _ => None,
        }
    }

    /// Key/value pairs of a dict or of a dict-like object.
    pub fn as_dict_items(&self) -> Option<Vec<(Value, Value)>> {
        match self {
            Value::Dict(d) => Some(d.borrow().clone()),
            Value::Object(o) => Some(o.borrow().dict_items.clone()),
            _ => None,
        }
    }

    /// Looks up a string key in a dict.
    pub fn get(&self, key: &str) -> Option<Value> {
        self.as_dict_items()?
            .into_iter()
            .find(|(k, _)| k.as_str().as_deref() == Some(key))
            .map(|(_, v)| v)
    }

    /// `(module, name)` of a global, or of the class of an object.
    pub fn class_path(&self) -> Option<(String, String)> {
        match self {
            Value::Global { module, name } => Some((module.clone(), name.clone())),
            Value::Object(o) => o.borrow().class.class_path(),
            _ => None,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("pickle error at byte {offset}: {message}")]
pub struct PickleError {
    pub offset: usize,
    pub message: String,
}

struct Machine<'a> {
    data: &'a [u8],
    pos: usize,
    stack: Vec<Value>,
    marks: Vec<usize>,
    memo: HashMap<usize, Value>,
}

/// Decodes one pickle from `data`.
pub fn from_slice(data: &[u8]) -> Result<Value, PickleError> {
    Machine {
        data,
        pos: 0,
        stack: Vec::new(),
        marks: Vec::new(),
        memo: HashMap::new(),
    }
    .run()
}

impl<'a> Machine<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, PickleError> {
        Err(PickleError {
            offset: self.pos,
            message: message.into(),
        })
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], PickleError> {
        if self.pos + n > self.data.len() {
            return self.err("unexpected end of data");
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn byte(&mut self) -> Result<u8, PickleError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<usize, PickleError> {
        let b = self.take(2)?;
        Ok(u16::from_le_bytes([b[0], b[1]]) as usize)
    }

    fn u32(&mut self) -> Result<usize, PickleError> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes(b.try_into().expect("4 bytes")) as usize)
    }

    fn u64(&mut self) -> Result<usize, PickleError> {
        let b = self.take(8)?;
        Ok(u64::from_le_bytes(b.try_into().expect("8 bytes")) as usize)
    }

    fn line(&mut self) -> Result<&'a str, PickleError> {
        let rest = &self.data[self.pos..];
        let Some(end) = rest.iter().position(|&b| b == b'\n') else {
            return self.err("unterminated text argument");
        };
        self.pos += end + 1;
        match std::str::from_utf8(&rest[..end]) {
            Ok(s) => Ok(s.trim_end_matches('\r')),
            Err(_) => self.err("non-UTF-8 text argument"),
        }
    }

    fn pop(&mut self) -> Result<Value, PickleError> {
        match self.stack.pop() {
            Some(v) => Ok(v),
            None => self.err("stack underflow"),
        }
    }

    fn top(&mut self) -> Result<&mut Value, PickleError> {
        if self.stack.is_empty() {
            return self.err("stack underflow");
        }
        Ok(self.stack.last_mut().expect("nonempty"))
    }

    fn pop_mark(&mut self) -> Result<Vec<Value>, PickleError> {
        let Some(mark) = self.marks.pop() else {
            return self.err("missing MARK");
        };
        if mark > self.stack.len() {
            return self.err("MARK beyond stack");
        }
        Ok(self.stack.split_off(mark))
    }

    fn memo_get(&self, idx: usize) -> Result<Value, PickleError> {
        match self.memo.get(&idx) {
            Some(v) => Ok(v.clone()),
            None => self.err(format!("memo key {idx} missing")),
        }
    }

    fn memo_put(&mut self, idx: usize) -> Result<(), PickleError> {
        let v = self.top()?.clone();
        self.memo.insert(idx, v);
        Ok(())
    }

    fn run(mut self) -> Result<Value, PickleError> {
        loop {
            let op = self.byte()?;
            match op {
                b'.' => return self.pop(),
                b'(' => self.marks.push(self.stack.len()),
                b'0' => {
                    self.pop()?;
                }
                b'1' => {
                    self.pop_mark()?;
                }
                b'2' => {
                    let v = self.top()?.clone();
                    self.stack.push(v);
                }
                0x80 => {
                    let proto = self.byte()?;
                    if proto > 5 {
                        return self.err(format!("unsupported protocol {proto}"));
                    }
                }
                0x95 => {
                    self.u64()?;
                }
                // integers
                b'J' => {
                    let b = self.take(4)?;
                    self.stack.push(Value::Int(i32::from_le_bytes(b.try_into().expect("4")) as i64));
                }
                b'K' => {
                    let b = self.byte()?;
                    self.stack.push(Value::Int(b as i64));
                }
                b'M' => {
                    let v = self.u16()?;
                    self.stack.push(Value::Int(v as i64));
                }
                0x8a => {
                    let n = self.byte()? as usize;
                    let v = self.long_bytes(n)?;
                    self.stack.push(v);
                }
                0x8b => {
                    let n = self.u32()?;
                    let v = self.long_bytes(n)?;
                    self.stack.push(v);
                }
                b'I' => {
                    let s = self.line()?;
                    let v = match s {
                        "00" => Value::Bool(false),
                        "01" => Value::Bool(true),
                        _ => match s.parse::<i64>() {
                            Ok(i) => Value::Int(i),
                            Err(_) => return self.err(format!("bad INT '{s}'")),
                        },
                    };
                    self.stack.push(v);
                }
                b'L' => {
                    let s = self.line()?;
                    match s.trim_end_matches('L').parse::<i64>() {
                        Ok(i) => self.stack.push(Value::Int(i)),
                        Err(_) => return self.err(format!("LONG '{s}' does not fit in 64 bits")),
                    }
                }
                b'N' => self.stack.push(Value::None),
                0x88 => self.stack.push(Value::Bool(true)),
                0x89 => self.stack.push(Value::Bool(false)),
                b'F' => {
                    let s = self.line()?;
                    match s.parse::<f64>() {
                        Ok(f) => self.stack.push(Value::Float(f)),
                        Err(_) => return self.err(format!("bad FLOAT '{s}'")),
                    }
                }
                b'G' => {
                    let b = self.take(8)?;
                    self.stack.push(Value::Float(f64::from_be_bytes(b.try_into().expect("8"))));
                }
                // strings and bytes
                b'S' => {
                    let s = self.line()?;
                    let v = unquote_py_string(s).ok_or_else(|| PickleError {
                        offset: self.pos,
                        message: format!("bad STRING {s}"),
                    })?;
                    self.stack.push(Value::Bytes(v.into()));
                }
                b'T' => {
                    let n = self.u32()?;
                    let b = self.take(n)?;
                    self.stack.push(Value::Bytes(b.into()));
                }
                b'U' | b'C' => {
                    let n = self.byte()? as usize;
                    let b = self.take(n)?;
                    self.stack.push(Value::Bytes(b.into()));
                }
                b'B' => {
                    let n = self.u32()?;
                    let b = self.take(n)?;
                    self.stack.push(Value::Bytes(b.into()));
                }
                0x8e | 0x96 => {
                    let n = self.u64()?;
                    let b = self.take(n)?;
                    self.stack.push(Value::Bytes(b.into()));
                }
                b'V' => {
                    let s = self.line()?;
                    self.stack.push(Value::Str(unescape_raw_unicode(s)));
                }
                b'X' => {
                    let n = self.u32()?;
                    let s = self.utf8(n)?;
                    self.stack.push(Value::Str(s));
                }
                0x8c => {
                    let n = self.byte()? as usize;
                    let s = self.utf8(n)?;
                    self.stack.push(Value::Str(s));
                }
                0x8d => {
                    let n = self.u64()?;
                    let s = self.utf8(n)?;
                    self.stack.push(Value::Str(s));
                }
                // containers
                b')' => self.stack.push(Value::Tuple(Vec::new())),
                b't' => {
                    let items = self.pop_mark()?;
                    self.stack.push(Value::Tuple(items));
                }
                0x85..=0x87 => {
                    let n = (op - 0x84) as usize;
                    if self.stack.len() < n {
                        return self.err("stack underflow");
                    }
                    let items = self.stack.split_off(self.stack.len() - n);
                    self.stack.push(Value::Tuple(items));
                }
                b']' => self.stack.push(Value::List(Rc::new(RefCell::new(Vec::new())))),
                b'l' => {
                    let items = self.pop_mark()?;
                    self.stack.push(Value::List(Rc::new(RefCell::new(items))));
                }
                b'}' => self.stack.push(Value::Dict(Rc::new(RefCell::new(Vec::new())))),
                b'd' => {
                    let items = self.pop_mark()?;
                    let pairs = pairs(items).ok_or_else(|| PickleError {
                        offset: self.pos,
                        message: "odd number of DICT items".into(),
                    })?;
                    self.stack.push(Value::Dict(Rc::new(RefCell::new(pairs))));
                }
                0x8f => self.stack.push(Value::Set(Rc::new(RefCell::new(Vec::new())))),
                0x91 => {
                    let items = self.pop_mark()?;
                    self.stack.push(Value::Set(Rc::new(RefCell::new(items))));
                }
                b'a' => {
                    let v = self.pop()?;
                    self.append(vec![v])?;
                }
                b'e' => {
                    let items = self.pop_mark()?;
                    self.append(items)?;
                }
                0x90 => {
                    let items = self.pop_mark()?;
                    match self.top()? {
                        Value::Set(s) => s.borrow_mut().extend(items),
                        _ => return self.err("ADDITEMS target is not a set"),
                    }
                }
                b's' => {
                    let v = self.pop()?;
                    let k = self.pop()?;
                    self.set_items(vec![(k, v)])?;
                }
                b'u' => {
                    let items = self.pop_mark()?;
                    let Some(p) = pairs(items) else {
                        return self.err("odd number of SETITEMS items");
                    };
                    self.set_items(p)?;
                }
                // memo
                b'p' => {
                    let s = self.line()?;
                    let Ok(idx) = s.parse() else {
                        return self.err("bad PUT index");
                    };
                    self.memo_put(idx)?;
                }
                b'q' => {
                    let idx = self.byte()? as usize;
                    self.memo_put(idx)?;
                }
                b'r' => {
                    let idx = self.u32()?;
                    self.memo_put(idx)?;
                }
                0x94 => {
                    let idx = self.memo.len();
                    self.memo_put(idx)?;
                }
                b'g' => {
                    let s = self.line()?;
                    let Ok(idx) = s.parse() else {
                        return self.err("bad GET index");
                    };
                    let v = self.memo_get(idx)?;
                    self.stack.push(v);
                }
                b'h' => {
                    let idx = self.byte()? as usize;
                    let v = self.memo_get(idx)?;
                    self.stack.push(v);
                }
                b'j' => {
                    let idx = self.u32()?;
                    let v = self.memo_get(idx)?;
                    self.stack.push(v);
                }
                // objects
                b'c' => {
                    let module = self.line()?.to_string();
                    let name = self.line()?.to_string();
                    self.stack.push(Value::Global { module, name });
                }
                0x93 => {
                    let name = self.pop()?.as_str();
                    let module = self.pop()?.as_str();
                    let (Some(module), Some(name)) = (module, name) else {
                        return self.err("STACK_GLOBAL needs two strings");
                    };
                    self.stack.push(Value::Global { module, name });
                }
                b'R' => {
                    let args = self.pop()?;
                    let callable = self.pop()?;
                    let Some(args) = args.as_seq() else {
                        return self.err("REDUCE arguments are not a tuple");
                    };
                    let v = self.call(callable, args)?;
                    self.stack.push(v);
                }
                0x81 => {
                    let args = self.pop()?;
                    let class = self.pop()?;
                    let args = args.as_seq().unwrap_or_default();
                    self.stack.push(new_object(class, args));
                }
                0x92 => {
                    let _kwargs = self.pop()?;
                    let args = self.pop()?;
                    let class = self.pop()?;
                    let args = args.as_seq().unwrap_or_default();
                    self.stack.push(new_object(class, args));
                }
                b'o' => {
                    let mut items = self.pop_mark()?;
                    if items.is_empty() {
                        return self.err("OBJ without class");
                    }
                    let class = items.remove(0);
                    self.stack.push(new_object(class, items));
                }
                b'i' => {
                    let module = self.line()?.to_string();
                    let name = self.line()?.to_string();
                    let args = self.pop_mark()?;
                    self.stack.push(new_object(Value::Global { module, name }, args));
                }
                b'b' => {
                    let state = self.pop()?;
                    match self.top()? {
                        Value::Object(o) => o.borrow_mut().state = Some(state),
                        Value::Dict(d) => {
                            if let Some(items) = state.as_dict_items() {
                                d.borrow_mut().extend(items);
                            }
                        }
                        _ => return self.err("BUILD target is not an object"),
                    }
                }
                b'P' | b'Q' => return self.err("persistent ids are not supported"),
                0x82..=0x84 => return self.err("extension registry codes are not supported"),
                0x97 | 0x98 => return self.err("out-of-band buffers are not supported"),
                other => return self.err(format!("unknown opcode 0x{other:02x}")),
            }
        }
    }

    fn utf8(&mut self, n: usize) -> Result<String, PickleError> {
        let b = self.take(n)?;
        match std::str::from_utf8(b) {
            Ok(s) => Ok(s.to_string()),
            Err(_) => self.err("invalid UTF-8 in unicode string"),
        }
    }

    fn long_bytes(&mut self, n: usize) -> Result<Value, PickleError> {
        let b = self.take(n)?;
        if n == 0 {
            return Ok(Value::Int(0));
        }
        if n > 8 {
            return self.err("integer wider than 64 bits");
        }
        let fill = if b[n - 1] & 0x80 != 0 { 0xff } else { 0 };
        let mut buf = [fill; 8];
        buf[..n].copy_from_slice(b);
        Ok(Value::Int(i64::from_le_bytes(buf)))
    }

    fn append(&mut self, items: Vec<Value>) -> Result<(), PickleError> {
        match self.top()? {
            Value::List(l) => l.borrow_mut().extend(items),
            Value::Object(o) => o.borrow_mut().list_items.extend(items),
            _ => return self.err("APPEND target is not a list"),
        }
        Ok(())
    }

    fn set_items(&mut self, items: Vec<(Value, Value)>) -> Result<(), PickleError> {
        match self.top()? {
            Value::Dict(d) => d.borrow_mut().extend(items),
            Value::Object(o) => o.borrow_mut().dict_items.extend(items),
            _ => return self.err("SETITEM target is not a dict"),
        }
        Ok(())
    }

    /// Constructor calls. A handful of builtins are evaluated because they
    /// only rebuild plain data; everything else becomes an [`Object`].
    fn call(&self, callable: Value, args: Vec<Value>) -> Result<Value, PickleError> {
        if let Some((module, name)) = callable.class_path() {
            match (module.as_str(), name.as_str()) {
                // Python 3 protocol-2 encoding of bytes
                ("_codecs", "encode") => {
                    if let Some(s) = args.first().and_then(|a| a.as_str()) {
                        let bytes: Vec<u8> = s.chars().map(|c| c as u32 as u8).collect();
                        return Ok(Value::Bytes(bytes.into()));
                    }
                }
                ("__builtin__" | "builtins", "bytes" | "bytearray") if args.is_empty() => {
                    return Ok(Value::Bytes(Vec::new().into()));
                }
                ("__builtin__" | "builtins", "set" | "frozenset") => {
                    let items = args.first().and_then(|a| a.as_seq()).unwrap_or_default();
                    return Ok(Value::Set(Rc::new(RefCell::new(items))));
                }
                ("copy_reg" | "copyreg", "_reconstructor") => {
                    let mut args = args.into_iter();
                    let Some(class) = args.next() else {
                        return self.err("_reconstructor without class");
                    };
                    return Ok(new_object(class, Vec::new()));
                }
                _ => {}
            }
        }
        Ok(new_object(callable, args))
    }
}

fn new_object(class: Value, args: Vec<Value>) -> Value {
    Value::Object(Rc::new(RefCell::new(Object {
        class,
        args,
        state: None,
        list_items: Vec::new(),
        dict_items: Vec::new(),
    })))
}

fn pairs(items: Vec<Value>) -> Option<Vec<(Value, Value)>> {
    if items.len() % 2 != 0 {
        return None;
    }
    let mut it = items.into_iter();
    let mut out = Vec::new();
    while let (Some(k), Some(v)) = (it.next(), it.next()) {
        out.push((k, v));
    }
    Some(out)
}

/// Decodes a Python 2 `repr()` string literal as used by protocol 0.
fn unquote_py_string(s: &str) -> Option<Vec<u8>> {
    let b = s.as_bytes();
    if b.len() < 2 || b[0] != b[b.len() - 1] || !(b[0] == b'\'' || b[0] == b'"') {
        return None;
    }
    let body = &b[1..b.len() - 1];
    let mut out = Vec::with_capacity(body.len());
    let mut i = 0;
    while i < body.len() {
        if body[i] != b'\\' {
            out.push(body[i]);
            i += 1;
            continue;
        }
        let c = *body.get(i + 1)?;
        i += 2;
        match c {
            b'n' => out.push(b'\n'),
            b'r' => out.push(b'\r'),
            b't' => out.push(b'\t'),
            b'\\' | b'\'' | b'"' => out.push(c),
            b'x' => {
                let hex = std::str::from_utf8(body.get(i..i + 2)?).ok()?;
                out.push(u8::from_str_radix(hex, 16).ok()?);
                i += 2;
            }
            _ => {
                out.push(b'\\');
                out.push(c);
            }
        }
    }
    Some(out)
}

/// Decodes `raw-unicode-escape` text (protocol 0 `UNICODE`).
fn unescape_raw_unicode(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '\\' && matches!(chars.peek(), Some('u') | Some('U')) {
            let width = if chars.next() == Some('u') { 4 } else { 8 };
            let hex: String = chars.by_ref().take(width).collect();
            if let Some(ch) = u32::from_str_radix(&hex, 16).ok().and_then(char::from_u32) {
                out.push(ch);
                continue;
            }
            out.push('\\');
            out.push_str(&hex);
        } else {
            out.push(c);
        }
    }
    out
}

/// Incremental protocol-2 pickle writer.
///
/// Emits the same opcode shapes Python 2 produced for the published
/// Planetoid files, so the output loads under Python 2 and, with
/// `encoding='latin1'`, under Python 3.
pub struct Writer {
    buf: Vec<u8>,
}

impl Default for Writer {
    fn default() -> Self {
        Self::new()
    }
}

impl Writer {
    pub fn new() -> Self {
        Self {
            buf: vec![0x80, 2],
        }
    }

    pub fn finish(mut self) -> Vec<u8> {
        self.buf.push(b'.');
        self.buf
    }

    pub fn mark(&mut self) -> &mut Self {
        self.buf.push(b'(');
        self
    }

    pub fn none(&mut self) -> &mut Self {
        self.buf.push(b'N');
        self
    }

    pub fn bool(&mut self, v: bool) -> &mut Self {
        self.buf.push(if v { 0x88 } else { 0x89 });
        self
    }

    pub fn int(&mut self, v: i64) -> &mut Self {
        if (0..256).contains(&v) {
            self.buf.push(b'K');
            self.buf.push(v as u8);
        } else if let Ok(v32) = i32::try_from(v) {
            self.buf.push(b'J');
            self.buf.extend_from_slice(&v32.to_le_bytes());
        } else {
            self.buf.push(0x8a);
            self.buf.push(8);
            self.buf.extend_from_slice(&v.to_le_bytes());
        }
        self
    }

    /// Python 2 `str` (byte string).
    pub fn byte_string(&mut self, b: &[u8]) -> &mut Self {
        if b.len() < 256 {
            self.buf.push(b'U');
            self.buf.push(b.len() as u8);
        } else {
            self.buf.push(b'T');
            self.buf.extend_from_slice(&(b.len() as u32).to_le_bytes());
        }
        self.buf.extend_from_slice(b);
        self
    }

    pub fn unicode(&mut self, s: &str) -> &mut Self {
        self.buf.push(b'X');
        self.buf.extend_from_slice(&(s.len() as u32).to_le_bytes());
        self.buf.extend_from_slice(s.as_bytes());
        self
    }

    pub fn global(&mut self, module: &str, name: &str) -> &mut Self {
        self.buf.push(b'c');
        self.buf.extend_from_slice(module.as_bytes());
        self.buf.push(b'\n');
        self.buf.extend_from_slice(name.as_bytes());
        self.buf.push(b'\n');
        self
    }

    /// `TUPLE` from the last mark.
    pub fn tuple(&mut self) -> &mut Self {
        self.buf.push(b't');
        self
    }

    pub fn empty_tuple(&mut self) -> &mut Self {
        self.buf.push(b')');
        self
    }

    pub fn tuple1(&mut self) -> &mut Self {
        self.buf.push(0x85);
        self
    }

    pub fn tuple2(&mut self) -> &mut Self {
        self.buf.push(0x86);
        self
    }

    pub fn tuple3(&mut self) -> &mut Self {
        self.buf.push(0x87);
        self
    }

    pub fn empty_list(&mut self) -> &mut Self {
        self.buf.push(b']');
        self
    }

    pub fn appends(&mut self) -> &mut Self {
        self.buf.push(b'e');
        self
    }

    pub fn empty_dict(&mut self) -> &mut Self {
        self.buf.push(b'}');
        self
    }

    pub fn setitems(&mut self) -> &mut Self {
        self.buf.push(b'u');
        self
    }

    pub fn reduce(&mut self) -> &mut Self {
        self.buf.push(b'R');
        self
    }

    pub fn newobj(&mut self) -> &mut Self {
        self.buf.push(0x81);
        self
    }

    pub fn build(&mut self) -> &mut Self {
        self.buf.push(b'b');
        self
    }
}

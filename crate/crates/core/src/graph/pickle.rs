//! Minimal Python pickle reader, enough for the public citation datasets:
//! numpy arrays, scipy CSR matrices and `defaultdict(list)` adjacency, as
//! written by Python 2 (`STRING` payloads) or Python 3 (`_codecs.encode`
//! wrapped payloads, `BYTES`).
//!
//! Unknown callables are not executed; `REDUCE`/`NEWOBJ`/`BUILD` produce an
//! [`Object`] record that the accessors below interpret.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub enum Value {
    None,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    Bytes(Vec<u8>),
    Tuple(Rc<Vec<Value>>),
    List(Rc<RefCell<Vec<Value>>>),
    Dict(Rc<RefCell<Vec<(Value, Value)>>>),
    Global(String, String),
    Object(Rc<RefCell<Object>>),
    Mark,
}

#[derive(Debug, Clone)]
pub struct Object {
    pub callable: Value,
    pub args: Vec<Value>,
    pub state: Option<Value>,
    pub list_items: Vec<Value>,
    pub dict_items: Vec<(Value, Value)>,
}

fn err(msg: impl Into<String>) -> Error {
    Error::Pickle(msg.into())
}

impl Value {
    fn object(callable: Value, args: Vec<Value>) -> Value {
        Value::Object(Rc::new(RefCell::new(Object {
            callable,
            args,
            state: None,
            list_items: Vec::new(),
            dict_items: Vec::new(),
        })))
    }

    pub fn as_int(&self) -> Result<i64> {
        match self {
            Value::Int(i) => Ok(*i),
            Value::Bool(b) => Ok(i64::from(*b)),
            other => Err(err(format!("expected int, got {}", other.kind()))),
        }
    }

    /// Text view. Python 2 `str` payloads arrive as bytes and decode as latin-1.
    pub fn as_str(&self) -> Result<String> {
        match self {
            Value::Str(s) => Ok(s.clone()),
            Value::Bytes(b) => Ok(b.iter().map(|&c| c as char).collect()),
            other => Err(err(format!("expected string, got {}", other.kind()))),
        }
    }

    /// Raw byte view. Text encodes as latin-1, matching how numpy pickles its buffers.
    pub fn as_bytes(&self) -> Result<Vec<u8>> {
        match self {
            Value::Bytes(b) => Ok(b.clone()),
            Value::Str(s) => s
                .chars()
                .map(|c| u8::try_from(u32::from(c)).map_err(|_| err("non latin-1 char in buffer")))
                .collect(),
            other => Err(err(format!("expected bytes, got {}", other.kind()))),
        }
    }

    pub fn as_tuple(&self) -> Result<Vec<Value>> {
        match self {
            Value::Tuple(t) => Ok(t.as_ref().clone()),
            Value::List(l) => Ok(l.borrow().clone()),
            other => Err(err(format!("expected tuple, got {}", other.kind()))),
        }
    }

    pub fn global_name(&self) -> Option<(String, String)> {
        match self {
            Value::Global(m, n) => Some((m.clone(), n.clone())),
            _ => None,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Value::None => "None",
            Value::Bool(_) => "bool",
            Value::Int(_) => "int",
            Value::Float(_) => "float",
            Value::Str(_) => "str",
            Value::Bytes(_) => "bytes",
            Value::Tuple(_) => "tuple",
            Value::List(_) => "list",
            Value::Dict(_) => "dict",
            Value::Global(..) => "global",
            Value::Object(_) => "object",
            Value::Mark => "mark",
        }
    }

    /// Key lookup in a dict (string keys compared by text).
    pub fn get(&self, key: &str) -> Option<Value> {
        let Value::Dict(d) = self else { return None };
        d.borrow()
            .iter()
            .find(|(k, _)| k.as_str().is_ok_and(|s| s == key))
            .map(|(_, v)| v.clone())
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| err("truncated pickle"))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn byte(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<usize> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()) as usize)
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }

    fn u64(&mut self) -> Result<usize> {
        usize::try_from(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
            .map_err(|_| err("length overflow"))
    }

    fn line(&mut self) -> Result<&'a str> {
        let rest = &self.buf[self.pos..];
        let end = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| err("unterminated text opcode"))?;
        self.pos += end + 1;
        std::str::from_utf8(&rest[..end]).map_err(|_| err("invalid utf-8 in text opcode"))
    }
}

fn le_signed(bytes: &[u8]) -> Result<i64> {
    if bytes.is_empty() {
        return Ok(0);
    }
    if bytes.len() > 8 {
        return Err(err("integer wider than 64 bits"));
    }
    let neg = bytes[bytes.len() - 1] & 0x80 != 0;
    let mut buf = if neg { [0xffu8; 8] } else { [0u8; 8] };
    buf[..bytes.len()].copy_from_slice(bytes);
    Ok(i64::from_le_bytes(buf))
}

fn unquote(s: &str) -> Result<Vec<u8>> {
    let inner = s
        .strip_prefix('\'')
        .and_then(|x| x.strip_suffix('\''))
        .or_else(|| s.strip_prefix('"').and_then(|x| x.strip_suffix('"')))
        .ok_or_else(|| err("badly quoted STRING"))?;
    let mut out = Vec::new();
    let mut chars = inner.bytes();
    while let Some(c) = chars.next() {
        if c != b'\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some(b'n') => out.push(b'\n'),
            Some(b't') => out.push(b'\t'),
            Some(b'r') => out.push(b'\r'),
            Some(b'x') => {
                let hex: Vec<u8> = chars.by_ref().take(2).collect();
                let s = std::str::from_utf8(&hex).map_err(|_| err("bad \\x escape"))?;
                out.push(u8::from_str_radix(s, 16).map_err(|_| err("bad \\x escape"))?);
            }
            Some(c) => out.push(c),
            None => return Err(err("dangling escape")),
        }
    }
    Ok(out)
}

/// Applies a callable. Only `_codecs.encode` is evaluated; everything else
/// becomes an opaque [`Object`].
fn apply(callable: Value, args: Vec<Value>) -> Result<Value> {
    if let Value::Global(m, n) = &callable {
        if m == "_codecs" && n == "encode" {
            let text = args.first().ok_or_else(|| err("encode without args"))?;
            return Ok(Value::Bytes(text.as_bytes()?));
        }
        if (m == "__builtin__" || m == "builtins") && n == "set" {
            return Ok(args.into_iter().next().unwrap_or(Value::None));
        }
    }
    Ok(Value::object(callable, args))
}

pub fn parse(buf: &[u8]) -> Result<Value> {
    let mut r = Reader { buf, pos: 0 };
    let mut stack: Vec<Value> = Vec::new();
    let mut memo: HashMap<usize, Value> = HashMap::new();

    fn pop(stack: &mut Vec<Value>) -> Result<Value> {
        stack.pop().ok_or_else(|| err("stack underflow"))
    }
    fn pop_mark(stack: &mut Vec<Value>) -> Result<Vec<Value>> {
        let at = stack
            .iter()
            .rposition(|v| matches!(v, Value::Mark))
            .ok_or_else(|| err("mark not found"))?;
        let items = stack.split_off(at + 1);
        stack.pop();
        Ok(items)
    }
    fn top(stack: &mut [Value]) -> Result<&mut Value> {
        stack.last_mut().ok_or_else(|| err("stack underflow"))
    }
    fn extend_list(target: &Value, items: Vec<Value>) -> Result<()> {
        match target {
            Value::List(l) => l.borrow_mut().extend(items),
            Value::Object(o) => o.borrow_mut().list_items.extend(items),
            other => return Err(err(format!("APPEND to {}", other.kind()))),
        }
        Ok(())
    }
    fn set_items(target: &Value, items: Vec<Value>) -> Result<()> {
        if !items.len().is_multiple_of(2) {
            return Err(err("odd SETITEMS"));
        }
        let mut it = items.into_iter();
        let mut pairs = Vec::new();
        while let (Some(k), Some(v)) = (it.next(), it.next()) {
            pairs.push((k, v));
        }
        match target {
            Value::Dict(d) => d.borrow_mut().extend(pairs),
            Value::Object(o) => o.borrow_mut().dict_items.extend(pairs),
            other => return Err(err(format!("SETITEM on {}", other.kind()))),
        }
        Ok(())
    }

    loop {
        let op = r.byte()?;
        match op {
            0x80 => {
                r.byte()?;
            }
            0x95 => {
                r.take(8)?;
            }
            b'.' => return pop(&mut stack),
            b'(' => stack.push(Value::Mark),
            b'0' => {
                pop(&mut stack)?;
            }
            b'1' => {
                pop_mark(&mut stack)?;
            }
            b'2' => {
                let v = top(&mut stack)?.clone();
                stack.push(v);
            }
            b'N' => stack.push(Value::None),
            0x88 => stack.push(Value::Bool(true)),
            0x89 => stack.push(Value::Bool(false)),
            b'I' => {
                let l = r.line()?;
                stack.push(match l {
                    "00" => Value::Bool(false),
                    "01" => Value::Bool(true),
                    _ => Value::Int(l.parse().map_err(|_| err("bad INT"))?),
                });
            }
            b'L' => {
                let l = r.line()?.trim_end_matches('L');
                stack.push(Value::Int(l.parse().map_err(|_| err("bad LONG"))?));
            }
            b'J' => stack.push(Value::Int(le_signed(r.take(4)?)?)),
            b'K' => stack.push(Value::Int(i64::from(r.byte()?))),
            b'M' => stack.push(Value::Int(r.u16()? as i64)),
            0x8a => {
                let n = r.byte()? as usize;
                stack.push(Value::Int(le_signed(r.take(n)?)?));
            }
            0x8b => {
                let n = r.u32()?;
                stack.push(Value::Int(le_signed(r.take(n)?)?));
            }
            b'F' => stack.push(Value::Float(
                r.line()?.parse().map_err(|_| err("bad FLOAT"))?,
            )),
            b'G' => stack.push(Value::Float(f64::from_be_bytes(
                r.take(8)?.try_into().unwrap(),
            ))),
            b'S' => stack.push(Value::Bytes(unquote(r.line()?)?)),
            b'T' => {
                let n = r.u32()?;
                stack.push(Value::Bytes(r.take(n)?.to_vec()));
            }
            b'U' => {
                let n = r.byte()? as usize;
                stack.push(Value::Bytes(r.take(n)?.to_vec()));
            }
            b'B' => {
                let n = r.u32()?;
                stack.push(Value::Bytes(r.take(n)?.to_vec()));
            }
            b'C' => {
                let n = r.byte()? as usize;
                stack.push(Value::Bytes(r.take(n)?.to_vec()));
            }
            0x8e | 0x96 => {
                let n = r.u64()?;
                stack.push(Value::Bytes(r.take(n)?.to_vec()));
            }
            b'V' => stack.push(Value::Str(r.line()?.to_string())),
            b'X' | 0x8c | 0x8d => {
                let n = match op {
                    b'X' => r.u32()?,
                    0x8c => r.byte()? as usize,
                    _ => r.u64()?,
                };
                let s = std::str::from_utf8(r.take(n)?).map_err(|_| err("invalid utf-8"))?;
                stack.push(Value::Str(s.to_string()));
            }
            b')' => stack.push(Value::Tuple(Rc::new(Vec::new()))),
            b't' => {
                let items = pop_mark(&mut stack)?;
                stack.push(Value::Tuple(Rc::new(items)));
            }
            0x85..=0x87 => {
                let n = (op - 0x84) as usize;
                if stack.len() < n {
                    return Err(err("stack underflow"));
                }
                let items = stack.split_off(stack.len() - n);
                stack.push(Value::Tuple(Rc::new(items)));
            }
            b']' => stack.push(Value::List(Rc::new(RefCell::new(Vec::new())))),
            b'l' => {
                let items = pop_mark(&mut stack)?;
                stack.push(Value::List(Rc::new(RefCell::new(items))));
            }
            b'a' => {
                let v = pop(&mut stack)?;
                extend_list(top(&mut stack)?, vec![v])?;
            }
            b'e' => {
                let items = pop_mark(&mut stack)?;
                extend_list(top(&mut stack)?, items)?;
            }
            b'}' | 0x8f => stack.push(Value::Dict(Rc::new(RefCell::new(Vec::new())))),
            b'd' => {
                let items = pop_mark(&mut stack)?;
                let d = Value::Dict(Rc::new(RefCell::new(Vec::new())));
                set_items(&d, items)?;
                stack.push(d);
            }
            b's' => {
                let v = pop(&mut stack)?;
                let k = pop(&mut stack)?;
                set_items(top(&mut stack)?, vec![k, v])?;
            }
            b'u' => {
                let items = pop_mark(&mut stack)?;
                set_items(top(&mut stack)?, items)?;
            }
            0x90 => {
                let items = pop_mark(&mut stack)?;
                extend_list(top(&mut stack)?, items)?;
            }
            0x91 => {
                let items = pop_mark(&mut stack)?;
                stack.push(Value::List(Rc::new(RefCell::new(items))));
            }
            b'c' => {
                let module = r.line()?.to_string();
                let name = r.line()?.to_string();
                stack.push(Value::Global(module, name));
            }
            0x93 => {
                let name = pop(&mut stack)?.as_str()?;
                let module = pop(&mut stack)?.as_str()?;
                stack.push(Value::Global(module, name));
            }
            b'R' => {
                let args = pop(&mut stack)?.as_tuple()?;
                let callable = pop(&mut stack)?;
                stack.push(apply(callable, args)?);
            }
            0x81 => {
                let args = pop(&mut stack)?.as_tuple()?;
                let cls = pop(&mut stack)?;
                stack.push(Value::object(cls, args));
            }
            0x92 => {
                pop(&mut stack)?;
                let args = pop(&mut stack)?.as_tuple()?;
                let cls = pop(&mut stack)?;
                stack.push(Value::object(cls, args));
            }
            b'b' => {
                let state = pop(&mut stack)?;
                match top(&mut stack)? {
                    Value::Object(o) => o.borrow_mut().state = Some(state),
                    other => return Err(err(format!("BUILD on {}", other.kind()))),
                }
            }
            b'p' => {
                let idx = r.line()?.parse().map_err(|_| err("bad PUT"))?;
                memo.insert(idx, top(&mut stack)?.clone());
            }
            b'q' => {
                let idx = r.byte()? as usize;
                memo.insert(idx, top(&mut stack)?.clone());
            }
            b'r' => {
                let idx = r.u32()?;
                memo.insert(idx, top(&mut stack)?.clone());
            }
            0x94 => {
                let idx = memo.len();
                memo.insert(idx, top(&mut stack)?.clone());
            }
            b'g' | b'h' | b'j' => {
                let idx = match op {
                    b'g' => r.line()?.parse().map_err(|_| err("bad GET"))?,
                    b'h' => r.byte()? as usize,
                    _ => r.u32()?,
                };
                let v = memo
                    .get(&idx)
                    .cloned()
                    .ok_or_else(|| err(format!("memo {idx} missing")))?;
                stack.push(v);
            }
            other => {
                return Err(err(format!(
                    "unsupported opcode 0x{other:02x} at {}",
                    r.pos - 1
                )))
            }
        }
    }
}

/// Decoded numpy array, flattened row-major, values widened to f64.
#[derive(Debug, Clone, PartialEq)]
pub struct NdArray {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

fn decode_dtype(dtype: &Value) -> Result<(char, usize, bool)> {
    let Value::Object(o) = dtype else {
        return Err(err("dtype is not an object"));
    };
    let o = o.borrow();
    let code = o
        .args
        .first()
        .ok_or_else(|| err("dtype without code"))?
        .as_str()?;
    let mut chars = code.chars();
    let kind = chars.next().ok_or_else(|| err("empty dtype"))?;
    let width: usize = chars
        .as_str()
        .parse()
        .map_err(|_| err(format!("dtype {code}")))?;
    let big_endian = match &o.state {
        Some(s) => {
            s.as_tuple()?
                .get(1)
                .map(Value::as_str)
                .transpose()?
                .as_deref()
                == Some(">")
        }
        None => false,
    };
    Ok((kind, width, big_endian))
}

fn read_scalar(kind: char, bytes: &[u8], big: bool) -> Result<f64> {
    macro_rules! num {
        ($t:ty) => {{
            let arr = bytes.try_into().unwrap();
            (if big {
                <$t>::from_be_bytes(arr)
            } else {
                <$t>::from_le_bytes(arr)
            }) as f64
        }};
    }
    Ok(match (kind, bytes.len()) {
        ('f', 4) => num!(f32),
        ('f', 8) => num!(f64),
        ('i', 1) => num!(i8),
        ('i', 2) => num!(i16),
        ('i', 4) => num!(i32),
        ('i', 8) => num!(i64),
        ('u', 1) | ('b', 1) => num!(u8),
        ('u', 2) => num!(u16),
        ('u', 4) => num!(u32),
        ('u', 8) => num!(u64),
        (k, w) => return Err(err(format!("unsupported dtype {k}{w}"))),
    })
}

impl NdArray {
    pub fn from_value(v: &Value) -> Result<Self> {
        let Value::Object(o) = v else {
            return Err(err(format!("expected ndarray, got {}", v.kind())));
        };
        let o = o.borrow();
        let state = o
            .state
            .as_ref()
            .ok_or_else(|| err("ndarray without state"))?
            .as_tuple()?;
        if state.len() != 5 {
            return Err(err("unexpected ndarray state layout"));
        }
        let shape = state[1]
            .as_tuple()?
            .iter()
            .map(|d| d.as_int().map(|x| x as usize))
            .collect::<Result<Vec<_>>>()?;
        let (kind, width, big) = decode_dtype(&state[2])?;
        let fortran = matches!(state[3], Value::Bool(true));
        let raw = state[4].as_bytes()?;
        let count: usize = shape.iter().product();
        if raw.len() != count * width {
            return Err(err(format!(
                "ndarray buffer {} bytes, expected {}",
                raw.len(),
                count * width
            )));
        }
        let mut data = raw
            .chunks_exact(width)
            .map(|c| read_scalar(kind, c, big))
            .collect::<Result<Vec<_>>>()?;
        if fortran && shape.len() == 2 {
            let (rows, cols) = (shape[0], shape[1]);
            let mut c = vec![0.0; data.len()];
            for i in 0..rows {
                for j in 0..cols {
                    c[i * cols + j] = data[j * rows + i];
                }
            }
            data = c;
        }
        Ok(Self { shape, data })
    }

    pub fn rows(&self) -> usize {
        self.shape.first().copied().unwrap_or(0)
    }

    pub fn cols(&self) -> usize {
        self.shape.get(1).copied().unwrap_or(1)
    }
}

/// Decoded scipy CSR matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub rows: usize,
    pub cols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<f64>,
}

impl CsrMatrix {
    /// Accepts a pickled scipy `csr_matrix` or a dense 2-D ndarray.
    pub fn from_value(v: &Value) -> Result<Self> {
        let Value::Object(o) = v else {
            return Err(err(format!("expected matrix, got {}", v.kind())));
        };
        let o = o.borrow();
        let state = o.state.clone().ok_or_else(|| err("matrix without state"))?;
        if let Value::Dict(_) = state {
            let format = state.get("format").map(|f| f.as_str()).transpose()?;
            if format.as_deref().is_some_and(|f| f != "csr") {
                return Err(err(format!("unsupported sparse format {format:?}")));
            }
            let shape = state
                .get("_shape")
                .or_else(|| state.get("shape"))
                .ok_or_else(|| err("sparse matrix without shape"))?
                .as_tuple()?;
            let field = |k: &str| -> Result<NdArray> {
                NdArray::from_value(&state.get(k).ok_or_else(|| err(format!("missing {k}")))?)
            };
            let to_idx = |a: NdArray| a.data.into_iter().map(|x| x as usize).collect::<Vec<_>>();
            let m = Self {
                rows: shape[0].as_int()? as usize,
                cols: shape[1].as_int()? as usize,
                indptr: to_idx(field("indptr")?),
                indices: to_idx(field("indices")?),
                data: field("data")?.data,
            };
            if m.indptr.len() != m.rows + 1
                || m.indices.len() != m.data.len()
                || m.indptr.last() != Some(&m.indices.len())
                || m.indices.iter().any(|&c| c >= m.cols)
            {
                return Err(err("inconsistent CSR structure"));
            }
            return Ok(m);
        }
        drop(o);
        let dense = NdArray::from_value(v)?;
        let (rows, cols) = (dense.rows(), dense.cols());
        let mut m = Self {
            rows,
            cols,
            indptr: vec![0],
            indices: Vec::new(),
            data: Vec::new(),
        };
        for i in 0..rows {
            for j in 0..cols {
                let x = dense.data[i * cols + j];
                if x != 0.0 {
                    m.indices.push(j);
                    m.data.push(x);
                }
            }
            m.indptr.push(m.indices.len());
        }
        Ok(m)
    }

    pub fn row(&self, i: usize) -> Vec<(usize, f64)> {
        (self.indptr[i]..self.indptr[i + 1])
            .map(|k| (self.indices[k], self.data[k]))
            .collect()
    }
}

/// Decodes a `dict` or `defaultdict` of int -> list of ints.
pub fn adjacency_dict(v: &Value) -> Result<Vec<(usize, Vec<usize>)>> {
    let items = match v {
        Value::Dict(d) => d.borrow().clone(),
        Value::Object(o) => o.borrow().dict_items.clone(),
        other => {
            return Err(err(format!(
                "expected adjacency dict, got {}",
                other.kind()
            )))
        }
    };
    items
        .into_iter()
        .map(|(k, v)| {
            let key = usize::try_from(k.as_int()?).map_err(|_| err("negative node id"))?;
            let nbrs = v
                .as_tuple()?
                .iter()
                .map(|x| {
                    x.as_int()
                        .and_then(|i| usize::try_from(i).map_err(|_| err("negative node id")))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((key, nbrs))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn python2_style_ndarray() {
        // protocol 2, as written by Python 2 numpy: SHORT_BINSTRING payloads
        let mut p = vec![0x80, 2];
        p.extend(b"cnumpy.core.multiarray\n_reconstruct\nq\x01");
        p.extend(b"cnumpy\nndarray\nq\x02K\x00\x85U\x01b\x87R");
        p.extend(b"(K\x01K\x02K\x02\x86cnumpy\ndtype\nq\x03U\x02i4K\x00K\x01\x87R");
        p.extend(b"(K\x03U\x01<NNNJ\xff\xff\xff\xffJ\xff\xff\xff\xffK\x00tb");
        p.push(0x89);
        p.push(b'U');
        p.push(16);
        for x in [1i32, -2, 3, 40] {
            p.extend(x.to_le_bytes());
        }
        p.extend(b"tb.");
        let v = parse(&p).unwrap();
        let a = NdArray::from_value(&v).unwrap();
        assert_eq!(a.shape, vec![2, 2]);
        assert_eq!(a.data, vec![1.0, -2.0, 3.0, 40.0]);
    }

    #[test]
    fn containers_and_memo_sharing() {
        // {1: [2, 3]} with the list memoized before it is filled
        let p = b"\x80\x02}q\x00K\x01]q\x01(K\x02K\x03es.";
        let v = parse(p).unwrap();
        let adj = adjacency_dict(&v).unwrap();
        assert_eq!(adj, vec![(1, vec![2, 3])]);
        let p = b"\x80\x02]q\x00h\x00\x86q\x01.";
        assert!(parse(p).is_ok());
    }

    #[test]
    fn text_protocol_scalars() {
        let v = parse(b"(I12\nF2.5\nS'a\\x41'\ntp0\n.").unwrap();
        let t = v.as_tuple().unwrap();
        assert_eq!(t[0].as_int().unwrap(), 12);
        assert!(matches!(t[1], Value::Float(x) if x == 2.5));
        assert_eq!(t[2].as_str().unwrap(), "aA");
    }

    #[test]
    fn truncated_input_errors() {
        assert!(parse(b"\x80\x02K").is_err());
        assert!(parse(b"\x80\x02\xff").is_err());
    }
}

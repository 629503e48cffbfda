use crate::error::ExpandingMapError;
use crate::model::CircleMapModel;
use std::fmt;

/// Arithmetic expression in one variable x, with sin, cos, and pi.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    X,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
}

impl Expr {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::X => x,
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Neg(a) => -a.eval(x),
            Expr::Sin(a) => a.eval(x).sin(),
            Expr::Cos(a) => a.eval(x).cos(),
        }
    }

    /// Symbolic d/dx. No simplification beyond dropping nothing; the tree
    /// stays small for the grammar at hand.
    pub fn derivative(&self) -> Expr {
        match self {
            Expr::Const(_) => Expr::Const(0.0),
            Expr::X => Expr::Const(1.0),
            Expr::Add(a, b) => Expr::Add(Box::new(a.derivative()), Box::new(b.derivative())),
            Expr::Sub(a, b) => Expr::Sub(Box::new(a.derivative()), Box::new(b.derivative())),
            Expr::Mul(a, b) => Expr::Add(
                Box::new(Expr::Mul(Box::new(a.derivative()), b.clone())),
                Box::new(Expr::Mul(a.clone(), Box::new(b.derivative()))),
            ),
            Expr::Div(a, b) => Expr::Div(
                Box::new(Expr::Sub(
                    Box::new(Expr::Mul(Box::new(a.derivative()), b.clone())),
                    Box::new(Expr::Mul(a.clone(), Box::new(b.derivative()))),
                )),
                Box::new(Expr::Mul(b.clone(), b.clone())),
            ),
            Expr::Neg(a) => Expr::Neg(Box::new(a.derivative())),
            Expr::Sin(a) => {
                Expr::Mul(Box::new(Expr::Cos(a.clone())), Box::new(a.derivative()))
            }
            Expr::Cos(a) => Expr::Neg(Box::new(Expr::Mul(
                Box::new(Expr::Sin(a.clone())),
                Box::new(a.derivative()),
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Number(v) => write!(f, "{v}"),
            Token::Ident(s) => write!(f, "{s}"),
            Token::Plus => write!(f, "+"),
            Token::Minus => write!(f, "-"),
            Token::Star => write!(f, "*"),
            Token::Slash => write!(f, "/"),
            Token::LParen => write!(f, "("),
            Token::RParen => write!(f, ")"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<Token>, ExpandingMapError> {
    let err = |m: String| ExpandingMapError::Parse(m);
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if let Some(tok) = match c {
            '+' => Some(Token::Plus),
            '-' => Some(Token::Minus),
            '*' => Some(Token::Star),
            '/' => Some(Token::Slash),
            '(' => Some(Token::LParen),
            ')' => Some(Token::RParen),
            _ => None,
        } {
            out.push(tok);
            i += 1;
            continue;
        }
        match c {
            ' ' | '\t' => i += 1,
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && matches!(bytes[i] as char, '0'..='9' | '.') {
                    i += 1;
                }
                // Exponent suffix like 1e-3.
                if i < bytes.len() && matches!(bytes[i] as char, 'e' | 'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && matches!(bytes[j] as char, '+' | '-') {
                        j += 1;
                    }
                    if j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let s = &text[start..i];
                let v = s
                    .parse::<f64>()
                    .map_err(|_| err(format!("bad number literal `{s}`")))?;
                out.push(Token::Number(v));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && matches!(bytes[i] as char, 'a'..='z' | 'A'..='Z' | '0'..='9' | '_')
                {
                    i += 1;
                }
                out.push(Token::Ident(text[start..i].to_string()));
            }
            other => return Err(err(format!("unexpected character `{other}`"))),
        };
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += t.is_some() as usize;
        t
    }

    fn expect(&mut self, want: Token) -> Result<(), ExpandingMapError> {
        match self.bump() {
            Some(t) if t == want => Ok(()),
            Some(t) => Err(ExpandingMapError::Parse(format!("expected `{want}`, found `{t}`"))),
            None => Err(ExpandingMapError::Parse(format!("expected `{want}` at end of input"))),
        }
    }

    fn expr(&mut self) -> Result<Expr, ExpandingMapError> {
        let mut node = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.bump();
                    node = Expr::Add(Box::new(node), Box::new(self.term()?));
                }
                Some(Token::Minus) => {
                    self.bump();
                    node = Expr::Sub(Box::new(node), Box::new(self.term()?));
                }
                _ => return Ok(node),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExpandingMapError> {
        let mut node = self.unary()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.bump();
                    node = Expr::Mul(Box::new(node), Box::new(self.unary()?));
                }
                Some(Token::Slash) => {
                    self.bump();
                    node = Expr::Div(Box::new(node), Box::new(self.unary()?));
                }
                _ => return Ok(node),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExpandingMapError> {
        if matches!(self.peek(), Some(Token::Minus)) {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, ExpandingMapError> {
        match self.bump() {
            Some(Token::Number(v)) => Ok(Expr::Const(v)),
            Some(Token::Ident(name)) => match name.as_str() {
                "x" => Ok(Expr::X),
                "pi" => Ok(Expr::Const(std::f64::consts::PI)),
                "sin" | "cos" => {
                    self.expect(Token::LParen)?;
                    let inner = self.expr()?;
                    self.expect(Token::RParen)?;
                    Ok(if name == "sin" {
                        Expr::Sin(Box::new(inner))
                    } else {
                        Expr::Cos(Box::new(inner))
                    })
                }
                other => {
                    Err(ExpandingMapError::Parse(format!("unknown identifier `{other}`")))
                }
            },
            Some(Token::LParen) => {
                let inner = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(inner)
            }
            Some(t) => Err(ExpandingMapError::Parse(format!("unexpected token `{t}`"))),
            None => Err(ExpandingMapError::Parse("unexpected end of input".into())),
        }
    }
}

/// Parse a lift expression over the grammar
/// expr := term (('+'|'-') term)*, term := unary (('*'|'/') unary)*,
/// unary := '-' unary | atom, atom := number | x | pi | sin(expr) |
/// cos(expr) | '(' expr ')'.
pub fn parse_expression(text: &str) -> Result<Expr, ExpandingMapError> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(ExpandingMapError::Parse("empty expression".into()));
    }
    let mut parser = Parser { tokens, pos: 0 };
    let node = parser.expr()?;
    if parser.pos != parser.tokens.len() {
        let t = &parser.tokens[parser.pos];
        return Err(ExpandingMapError::Parse(format!("trailing input at `{t}`")));
    }
    Ok(node)
}

/// Build a map model from a lift expression. The derivative is taken
/// symbolically and the expansion constant is measured as the grid minimum
/// of the derivative; model validation then re-checks slope, degree, and
/// periodicity.
pub fn model_from_expression(
    text: &str,
    degree: u32,
    grid: usize,
) -> Result<CircleMapModel, ExpandingMapError> {
    let lift = parse_expression(text)?;
    let deriv = lift.derivative();
    let mut min_slope = f64::INFINITY;
    for i in 0..4096 {
        min_slope = min_slope.min(deriv.eval(i as f64 / 4096.0));
    }
    if !(min_slope > 1.0) {
        return Err(ExpandingMapError::InvalidModel(format!(
            "expression slope reaches {min_slope}, not expanding"
        )));
    }
    let name = format!("expr {text}");
    CircleMapModel::new(name, degree, min_slope, grid, move |x| lift.eval(x), move |x| {
        deriv.eval(x)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::TAU;

    #[test]
    fn expression_and_derivative_match_closed_forms() {
        let e = parse_expression("2*x + 0.5*sin(2*pi*x)/(2*pi)").unwrap();
        let d = e.derivative();
        for i in 0..97 {
            let x = i as f64 / 97.0;
            assert_abs_diff_eq!(
                e.eval(x),
                2.0 * x + 0.5 * (TAU * x).sin() / TAU,
                epsilon = 1e-15
            );
            assert_abs_diff_eq!(d.eval(x), 2.0 + 0.5 * (TAU * x).cos(), epsilon = 1e-14);
        }
    }

    #[test]
    fn expression_model_agrees_with_the_preset() {
        let from_text =
            model_from_expression("2*x + 0.5*sin(2*pi*x)/(2*pi)", 2, 256).unwrap();
        let preset = CircleMapModel::perturbed2(0.5, 256).unwrap();
        for i in 0..257 {
            let x = i as f64 / 257.0;
            assert_abs_diff_eq!(from_text.lift_at(x), preset.lift_at(x), epsilon = 1e-12);
            assert_abs_diff_eq!(
                from_text.derivative_at(x),
                preset.derivative_at(x),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn precedence_and_unary_minus() {
        let e = parse_expression("1 - 2 * 3 + -4").unwrap();
        assert_abs_diff_eq!(e.eval(0.0), -9.0);
        let nested = parse_expression("cos(pi * (1 - x))").unwrap();
        assert_abs_diff_eq!(nested.eval(0.0), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn parse_errors_name_the_problem() {
        for (text, needle) in [
            ("2 * ", "end of input"),
            ("", "empty expression"),
            ("sin 3", "expected `(`"),
            ("2x + tanh(x)", "trailing input at `x`"),
            ("tanh(x)", "unknown identifier `tanh`"),
            ("(1 + 2", "expected `)`"),
            ("1 + 2)", "trailing input"),
            ("1 & 2", "unexpected character `&`"),
        ] {
            let err = parse_expression(text).unwrap_err().to_string();
            assert!(err.contains(needle), "{text}: {err}");
        }
    }

    #[test]
    fn non_expanding_expression_is_rejected() {
        let err = model_from_expression("x + sin(2*pi*x)", 1, 256).unwrap_err();
        assert!(err.to_string().contains("not expanding"), "{err}");
    }
}

use num::BigInt;

/// Source position, 1-based.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractAst {
    pub name: String,
    /// Declaration order is kept so pretty-printing reproduces the source layout.
    pub vars: Vec<VarDecl>,
    pub functions: Vec<FunctionDecl>,
}

impl ContractAst {
    pub fn numerics(&self) -> impl Iterator<Item = &VarDecl> {
        self.vars.iter().filter(|v| matches!(v.kind, VarKind::Numeric { .. }))
    }

    pub fn maps(&self) -> impl Iterator<Item = &VarDecl> {
        self.vars.iter().filter(|v| matches!(v.kind, VarKind::Map { .. }))
    }

    pub fn ids(&self) -> impl Iterator<Item = &VarDecl> {
        self.vars.iter().filter(|v| matches!(v.kind, VarKind::Id { .. }))
    }

    pub fn var(&self, name: &str) -> Option<&VarDecl> {
        self.vars.iter().find(|v| v.name == name)
    }

    pub fn function(&self, name: &str) -> Option<&FunctionDecl> {
        self.functions.iter().find(|f| f.name == name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub kind: VarKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VarKind {
    Numeric { lo: BigInt, hi: BigInt, init: BigInt },
    Map { lo: BigInt, hi: BigInt, init: BigInt },
    Id { init: IdInit },
}

/// Initial value of an id variable: `null` or a party literal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IdInit {
    Null,
    Party(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FunctionKind {
    OneParty,
    MultiParty,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionDecl {
    pub name: String,
    pub tlo: BigInt,
    pub thi: BigInt,
    pub kind: FunctionKind,
    pub params: Vec<Param>,
    pub body: Vec<Stmt>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub target: Target,
    pub designator: PartyRef,
    pub payable: bool,
    pub default: Option<BigInt>,
    pub span: Span,
}

/// A singleton variable: numeric, id, or one map entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Target {
    Var(String),
    MapEntry(String, PartyRef),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PartyRef {
    Caller,
    Null,
    Var(String),
    /// The analysed party; only meaningful inside objectives.
    Me,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stmt {
    If {
        cond: Bexpr,
        then: Vec<Stmt>,
        els: Option<Vec<Stmt>>,
        span: Span,
    },
    Assign {
        target: Target,
        value: Rhs,
        span: Span,
    },
    Payout {
        to: PartyRef,
        amount: Expr,
        span: Span,
    },
    Return {
        span: Span,
    },
}

impl Stmt {
    pub fn span(&self) -> Span {
        match self {
            Stmt::If { span, .. } | Stmt::Assign { span, .. } | Stmt::Payout { span, .. } | Stmt::Return { span } => *span,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rhs {
    Expr(Expr),
    Party(PartyRef),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Gt => CmpOp::Le,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Ge => CmpOp::Lt,
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
            CmpOp::Le => "<=",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Int(BigInt),
    Var(String),
    MapGet(String, PartyRef),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bexpr {
    Cmp(CmpOp, Expr, Expr),
    /// Party equality; `negated` encodes `!=`.
    PartyEq { lhs: PartyRef, rhs: PartyRef, negated: bool },
    And(Box<Bexpr>, Box<Bexpr>),
    Or(Box<Bexpr>, Box<Bexpr>),
    Not(Box<Bexpr>),
}

use alloc::format;
use alloc::string::String;
use core::fmt::Write;

use super::{conflicts, ProblemInstance};

const WRAP: usize = 78;

/// Accumulates one LP row, breaking long rows before a term.
struct Row<'a> {
    out: &'a mut String,
    width: usize,
    empty: bool,
}

impl<'a> Row<'a> {
    fn start(out: &'a mut String, label: &str) -> Self {
        let head = format!(" {label}:");
        let width = head.len();
        out.push_str(&head);
        Row {
            out,
            width,
            empty: true,
        }
    }

    fn term(&mut self, coefficient: Option<&str>, negative: bool, var: &str) {
        let mut piece = String::new();
        match (self.empty, negative) {
            (true, false) => {}
            (true, true) => piece.push_str("- "),
            (false, false) => piece.push_str("+ "),
            (false, true) => piece.push_str("- "),
        }
        if let Some(c) = coefficient {
            piece.push_str(c);
            piece.push(' ');
        }
        piece.push_str(var);
        if self.width + 1 + piece.len() > WRAP && !self.empty {
            self.out.push_str("\n   ");
            self.width = 3;
        } else {
            self.out.push(' ');
            self.width += 1;
        }
        self.width += piece.len();
        self.out.push_str(&piece);
        self.empty = false;
    }

    fn finish(self, rhs: &str) {
        if rhs.is_empty() {
            self.out.push('\n');
        } else {
            let _ = writeln!(self.out, " {rhs}");
        }
    }
}

/// Writes the linearized placement model in CPLEX-LP format.
///
/// Variables: `x_{i}_{j}` (item `i` in container `j`) and `y_{n}_{j}`
/// (container `j` on ladder variant `n`, variant 0 being the zero
/// variant). Costs are in EUR, capacities in MB.
pub fn export_lp(inst: &ProblemInstance) -> String {
    let items = inst.items();
    let variants = inst.variants();
    let c = inst.max_containers();
    let mut out = String::new();

    out.push_str("\\ placement model\n");
    for (i, item) in items.iter().enumerate() {
        let _ = writeln!(
            out,
            "\\ item {i}: {} tenant={} cap_mb={} shareable={}",
            item.id, item.tenant, item.capacity.0, item.shareable
        );
    }
    for (n, v) in variants.iter().enumerate() {
        let _ = writeln!(
            out,
            "\\ variant {n}: {} vendor={} cap_mb={} cost_eur_mo={}",
            v.id, v.vendor, v.capacity.0, v.cost
        );
    }

    out.push_str("Minimize\n");
    let mut obj = Row::start(&mut out, "obj");
    let mut any_cost = false;
    for j in 0..c {
        for (n, v) in variants.iter().enumerate() {
            if v.cost.0 > 0 {
                obj.term(Some(&format!("{}", v.cost)), false, &format!("y_{n}_{j}"));
                any_cost = true;
            }
        }
    }
    if !any_cost {
        obj.term(Some("0"), false, "y_0_0");
    }
    obj.finish("");

    out.push_str("Subject To\n");
    for i in 0..items.len() {
        let mut row = Row::start(&mut out, &format!("c1_{i}"));
        for j in 0..c {
            row.term(None, false, &format!("x_{i}_{j}"));
        }
        row.finish("= 1");
    }
    for j in 0..c {
        let mut row = Row::start(&mut out, &format!("c2_{j}"));
        for n in 0..variants.len() {
            row.term(None, false, &format!("y_{n}_{j}"));
        }
        row.finish("= 1");
    }
    for j in 0..c {
        let mut row = Row::start(&mut out, &format!("c3_{j}"));
        for (i, item) in items.iter().enumerate() {
            row.term(Some(&format!("{}", item.capacity.0)), false, &format!("x_{i}_{j}"));
        }
        for (n, v) in variants.iter().enumerate() {
            if v.capacity.0 > 0 {
                row.term(Some(&format!("{}", v.capacity.0)), true, &format!("y_{n}_{j}"));
            }
        }
        row.finish("<= 0");
    }
    for i in 0..items.len() {
        for k in i + 1..items.len() {
            if !conflicts(&items[i], &items[k]) {
                continue;
            }
            for j in 0..c {
                let mut row = Row::start(&mut out, &format!("c4_{i}_{k}_{j}"));
                row.term(None, false, &format!("x_{i}_{j}"));
                row.term(None, false, &format!("x_{k}_{j}"));
                row.finish("<= 1");
            }
        }
    }
    if !items.is_empty() {
        for j in 0..c {
            let mut row = Row::start(&mut out, &format!("c5_{j}"));
            for i in 0..items.len() {
                row.term(None, false, &format!("x_{i}_{j}"));
            }
            row.finish(&format!("<= {}", inst.max_items_per_container()));
        }
    }

    out.push_str("Binary\n");
    let mut line = String::new();
    let flush = |line: &mut String, out: &mut String| {
        if !line.is_empty() {
            out.push_str(line);
            out.push('\n');
            line.clear();
        }
    };
    let vars = (0..items.len())
        .flat_map(|i| (0..c).map(move |j| format!("x_{i}_{j}")))
        .chain((0..variants.len()).flat_map(|n| (0..c).map(move |j| format!("y_{n}_{j}"))));
    for var in vars {
        if line.len() + var.len() + 1 > WRAP {
            flush(&mut line, &mut out);
        }
        line.push(' ');
        line.push_str(&var);
    }
    flush(&mut line, &mut out);
    out.push_str("End\n");
    out
}

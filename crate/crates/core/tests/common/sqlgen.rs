//! Random SQL inside the supported SELECT grammar, with varied spacing,
//! keyword case, quoting and comments.

use proptest::prelude::*;
use proptest::sample::select;

fn kw(word: &'static str) -> impl Strategy<Value = String> {
    prop_oneof![
        Just(word.to_ascii_uppercase()),
        Just(word.to_ascii_lowercase()),
        Just({
            let mut s = word.to_ascii_lowercase();
            s[..1].make_ascii_uppercase();
            s
        }),
    ]
}

fn ws() -> impl Strategy<Value = String> {
    prop_oneof![
        6 => Just(" ".to_string()),
        1 => Just("  ".to_string()),
        1 => Just("\n".to_string()),
        1 => Just("\t ".to_string()),
        1 => Just(" -- note\n".to_string()),
    ]
}

fn ident() -> impl Strategy<Value = String> {
    prop_oneof![
        8 => select(vec!["orders", "customer", "t1", "a", "b", "first_name", "amount", "region", "_x9"]).prop_map(String::from),
        1 => Just("\"order\"".to_string()),
        1 => Just("\"Mixed Case\"".to_string()),
        1 => Just("`back tick`".to_string()),
    ]
}

fn column() -> impl Strategy<Value = String> {
    prop_oneof![ident(), (ident(), ident()).prop_map(|(t, c)| format!("{t}.{c}"))]
}

fn literal() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("'Terminal'".to_string()),
        "[a-zA-Z ]{0,8}".prop_map(|s| format!("'{s}'")),
        Just("'it''s'".to_string()),
        (0u32..100_000).prop_map(|n| n.to_string()),
        (0u32..1000, 0u32..100).prop_map(|(a, b)| format!("{a}.{b}")),
        (1u32..500).prop_map(|n| format!("-{n}")),
    ]
}

fn op() -> impl Strategy<Value = String> {
    prop_oneof![
        select(vec!["=", "!=", "<>", "<", "<=", ">", ">="]).prop_map(String::from),
        kw("like"),
        kw("not").prop_flat_map(|n| kw("like").prop_map(move |l| format!("{n} {l}"))),
    ]
}

fn aggregate() -> impl Strategy<Value = String> {
    (
        select(vec!["COUNT", "sum", "Avg", "MIN", "max"]),
        any::<bool>(),
        prop_oneof![Just("*".to_string()), column()],
    )
        .prop_map(|(f, distinct, arg)| {
            let arg = if arg == "*" && f != "COUNT" { "a".to_string() } else { arg };
            if distinct && arg != "*" {
                format!("{f}(DISTINCT {arg})")
            } else {
                format!("{f}({arg})")
            }
        })
}

fn alias() -> impl Strategy<Value = String> {
    prop_oneof![
        3 => Just(String::new()),
        1 => select(vec!["n", "total", "x1"]).prop_map(|a| format!(" AS {a}")),
        1 => select(vec!["n", "total", "x1"]).prop_map(|a| format!(" {a}")),
    ]
}

fn select_list() -> impl Strategy<Value = String> {
    prop_oneof![
        1 => Just("*".to_string()),
        1 => ident().prop_map(|t| format!("{t}.*")),
        5 => prop::collection::vec(
            (prop_oneof![column(), aggregate()], alias()).prop_map(|(e, a)| format!("{e}{a}")),
            1..4,
        )
        .prop_map(|v| v.join(", ")),
    ]
}

fn join() -> impl Strategy<Value = String> {
    (
        select(vec!["JOIN", "inner join", "LEFT JOIN", "left outer join", "CROSS JOIN"]),
        ident(),
        prop::collection::vec((column(), column()), 0..3),
    )
        .prop_map(|(kind, table, on)| {
            let mut s = format!("{kind} {table}");
            if !on.is_empty() {
                let conds: Vec<String> = on.iter().map(|(l, r)| format!("{l} = {r}")).collect();
                s.push_str(&format!(" ON {}", conds.join(" AND ")));
            }
            s
        })
}

fn where_clause() -> impl Strategy<Value = String> {
    prop::collection::vec(((column(), op(), literal()), select(vec!["AND", "or"])), 0..4).prop_map(|conds| {
        if conds.is_empty() {
            return String::new();
        }
        let mut s = String::from(" WHERE ");
        for (i, ((c, o, l), conn)) in conds.iter().enumerate() {
            if i > 0 {
                s.push_str(&format!(" {conn} "));
            }
            s.push_str(&format!("{c} {o} {l}"));
        }
        s
    })
}

fn core() -> impl Strategy<Value = String> {
    (
        any::<bool>(),
        select_list(),
        ident(),
        prop::option::of(select(vec!["o", "c2"])),
        prop::collection::vec(join(), 0..3),
        where_clause(),
        prop::collection::vec(column(), 0..3),
        prop::collection::vec((prop_oneof![column(), aggregate()], select(vec!["", " ASC", " desc"])), 0..3),
        prop::option::of(0u32..1000),
        ws(),
        kw("select"),
        kw("from"),
    )
        .prop_map(|(distinct, items, table, alias, joins, wh, group, order, limit, space, select_kw, from_kw)| {
            let mut s = select_kw;
            if distinct {
                s.push_str(" DISTINCT");
            }
            s.push_str(&space);
            s.push_str(&items);
            s.push_str(&format!("{space}{from_kw} {table}"));
            if let Some(a) = alias {
                s.push_str(&format!(" {a}"));
            }
            for j in joins {
                s.push_str(&format!("{space}{j}"));
            }
            s.push_str(&wh);
            if !group.is_empty() {
                s.push_str(&format!(" GROUP BY {}", group.join(", ")));
            }
            if !order.is_empty() {
                let items: Vec<String> = order.iter().map(|(e, d)| format!("{e}{d}")).collect();
                s.push_str(&format!(" ORDER BY {}", items.join(", ")));
            }
            if let Some(n) = limit {
                s.push_str(&format!(" LIMIT {n}"));
            }
            s
        })
}

/// One statement of the supported grammar.
pub fn statement() -> impl Strategy<Value = String> {
    (
        core(),
        prop::option::of((select(vec!["UNION", "union all", "INTERSECT"]), core())),
        select(vec!["", ";", " ;", "\n"]),
    )
        .prop_map(|(left, right, end)| match right {
            Some((op, right)) => format!("{left} {op} {right}{end}"),
            None => format!("{left}{end}"),
        })
}

/// Statements that use window functions somewhere.
pub fn window_statement() -> impl Strategy<Value = String> {
    (
        select(vec!["RANK()", "row_number()", "DENSE_RANK()", "SUM(a)", "count(*)", "LAG(a)", "AVG(amount)"]),
        prop::option::of(column()),
        prop::option::of(column()),
        prop::option::of(select_list()),
        ident(),
        where_clause(),
    )
        .prop_map(|(func, partition, order, items, table, wh)| {
            let mut window = String::from("OVER (");
            if let Some(p) = partition {
                window.push_str(&format!("PARTITION BY {p}"));
            }
            if let Some(o) = order {
                window.push_str(&format!(" ORDER BY {o}"));
            }
            window.push(')');
            let items = items.map_or(String::new(), |i| format!(", {i}"));
            format!("SELECT {func} {window}{items} FROM {table}{wh}")
        })
}

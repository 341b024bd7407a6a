use mtwkit_core::cost_catalog::catalog_entries;

/// The catalog as an aligned text table, one row per cost.
pub fn catalog_table() -> String {
    let head = ["cost", "formula", "parameters", "singular set", "stated status"];
    let rows: Vec<[String; 5]> = catalog_entries()
        .into_iter()
        .map(|e| {
            [
                e.id.to_string(),
                e.formula.to_string(),
                e.parameters.to_string(),
                e.singular_set.to_string(),
                format!("{} ({})", e.stated_status, e.example),
            ]
        })
        .collect();
    let mut width = head.map(str::len);
    for r in &rows {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let mut s = String::new();
        for (i, c) in cells.iter().enumerate() {
            if i + 1 == cells.len() {
                s.push_str(c);
            } else {
                s.push_str(&format!("{c:<w$}  ", w = width[i]));
            }
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(&head.map(String::from));
    out.push_str(&line(&width.map(|w| "-".repeat(w))));
    for r in &rows {
        out.push_str(&line(r));
    }
    out
}

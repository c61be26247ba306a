use std::collections::BTreeSet;

use hiddensum::classify::{appendix_representatives, canonical_key, classify_all, Universe};
use hiddensum::enumerate::{
    count_codim2, count_codim3, count_total, count_variety, enumerate_all_iter, variety_upper_bound,
};
use hiddensum::exec::Exec;
use hiddensum::hiddensum::{build_exterior_group, standardize};
use hiddensum::{Gf2Matrix, Gf2Vector, HiddenSum};

use crate::{report, CmdResult, Suite};

pub fn run(suite: Suite, dim: Option<usize>) -> CmdResult {
    match suite {
        Suite::Rings => rings(dims(dim, 3..=5)?),
        Suite::Counts => counts(dims(dim, 3..=6)?),
        Suite::Dim7 => dim7(),
        Suite::Appendix => appendix(dims(dim, 3..=6)?),
    }
}

fn dims(dim: Option<usize>, all: std::ops::RangeInclusive<usize>) -> Result<Vec<usize>, String> {
    match dim {
        None => Ok(all.collect()),
        Some(n) if (3..=6).contains(&n) => Ok(vec![n]),
        Some(n) => Err(format!("N must lie in 3..=6, got {n}")),
    }
}

fn rings(dims: Vec<usize>) -> CmdResult {
    let mut ok = true;
    for dim in dims {
        let (mut groups, mut axioms, mut unipotent, mut coords, mut normal_form) =
            (0u64, 0u64, 0u64, 0u64, 0u64);
        for d in 1..=dim - 2 {
            for t in enumerate_all_iter(dim, d)? {
                groups += 1;
                let a = t.algebra();
                if a.check_axioms().is_err() || !a.triple_products_vanish() {
                    axioms += 1;
                }
                if (0..1u64 << dim).any(|v| {
                    let k = a.kappa(Gf2Vector::truncated(dim, v));
                    !k.mul(&k).map(|m| m.is_identity()).unwrap_or(false)
                }) {
                    unipotent += 1;
                }
                if (0..1u64 << dim).any(|v| t.combine_bits(t.coordinates_bits(v)) != v) {
                    coords += 1;
                }
                let back = standardize(&t.to_generated()).and_then(|s| s.embedded());
                if !back.is_ok_and(|s| s.algebra() == a) {
                    normal_form += 1;
                }
            }
        }
        ok &= report(
            axioms == 0,
            &format!("N={dim} nil ring axioms"),
            format!("{groups} groups, {axioms} failures"),
        );
        ok &= report(
            unipotent == 0,
            &format!("N={dim} kappa squares to 1"),
            format!("{unipotent} failures"),
        );
        ok &= report(
            coords == 0,
            &format!("N={dim} coordinates invert combine"),
            format!("{coords} failures"),
        );
        ok &= report(
            normal_form == 0,
            &format!("N={dim} normal form round trip"),
            format!("{normal_form} failures"),
        );
    }
    Ok(ok)
}

fn counts(dims: Vec<usize>) -> CmdResult {
    let mut ok = true;
    for &dim in &dims {
        for d in 1..=dim - 2 {
            let formula = count_total(dim, d)?;
            let listed = enumerate_all_iter(dim, d)?.count();
            ok &= report(
                formula == listed.into(),
                &format!("N={dim} d={d} formula matches enumeration"),
                format!("{formula} vs {listed}"),
            );
        }
    }
    let codim2 = (4..=12).all(|n| count_codim2(n) == count_total(n, n - 2).unwrap());
    ok &= report(codim2, "codim 2 closed form", "N = 4..12");
    let codim3 = (5..=12).all(|n| count_codim3(n) == count_total(n, n - 3).unwrap());
    ok &= report(codim3, "codim 3 closed form", "N = 5..12");
    let mut pairs = 0;
    let mut sound = true;
    for n in 2..=8usize {
        for d in 1.. {
            if d * n * (n - 1) / 2 > 20 {
                break;
            }
            let count = count_variety(n, d)?;
            let bound = variety_upper_bound(n, d);
            sound &= count <= bound && (n != 2 || count == bound);
            pairs += 1;
        }
    }
    ok &= report(sound, "variety bound", format!("{pairs} (n,d) pairs"));
    Ok(ok)
}

fn dim7() -> CmdResult {
    let group = build_exterior_group(7);
    let mut ok = report(
        group.is_elementary_abelian_regular()?,
        "exterior group is elementary abelian regular",
        "N=7",
    );
    let expected = Gf2Matrix::from_strs(&[
        "1000000", "0101000", "0010100", "0001000", "0000100", "0000011", "0000001",
    ])?;
    let kappa = group.generators()[0].linear();
    ok &= report(kappa == &expected, "kappa_e1", kappa.to_strings().join(" "));
    let u = group.u_space()?;
    ok &= report(
        u == vec![Gf2Vector::unit(7, 6)],
        "U is spanned by e7",
        format!("dim U = {}", u.len()),
    );
    let normalized = group.normalized_by_translations()?;
    ok &= report(
        !normalized,
        "translations do not normalize",
        format!("normalized = {normalized}"),
    );
    let std = standardize(&group)?;
    ok &= report(
        std.embedded().is_err(),
        "no block normal form",
        format!("head = {} tail = {}", std.head, std.tail),
    );
    Ok(ok)
}

fn appendix(dims: Vec<usize>) -> CmdResult {
    let mut ok = true;
    for dim in dims {
        let reps = appendix_representatives(dim);
        let table = classify_all(dim, true)?;
        let universe = Universe::build(dim, Exec::Parallel)?;
        let mut seen = BTreeSet::new();
        for rep in &reps {
            let valid = rep.group.is_elementary_abelian_regular()?
                && rep.group.normalized_by_translations()?;
            let class = standardize(&rep.group)
                .and_then(|s| s.embedded())
                .ok()
                .and_then(|t| {
                    table
                        .locate(&universe, canonical_key(&t).digest)
                        .ok()
                        .flatten()
                });
            let detail = match class {
                Some(i) => format!("class {i}, size {}", table.classes[i].size),
                None => "not located".to_string(),
            };
            let fresh = class.is_some_and(|i| seen.insert(i));
            ok &= report(valid && fresh, &format!("N={dim} {}", rep.label), detail);
        }
        ok &= report(
            reps.len() == table.classes.len(),
            &format!("N={dim} representatives cover the classes"),
            format!(
                "{} representatives, {} classes",
                reps.len(),
                table.classes.len()
            ),
        );
    }
    Ok(ok)
}

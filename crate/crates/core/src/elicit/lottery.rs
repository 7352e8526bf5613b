use super::Prizes;
use crate::domain::{Event, Gamble, Outcome};
use crate::error::{Error, Result};
use crate::oracle::Interview;
use crate::reu::Preference;

fn bet(iv: &Interview<'_>, event: &Event, prizes: Prizes) -> Gamble {
    Gamble::binary(event, Outcome::Money(prizes.best), Outcome::Money(prizes.worst), iv.n_atoms())
}

/// Is the agent indifferent to moving the better prize from `E` to `not E`?
/// For a risk-weighted expected-utility agent, exactly when `p(E) = 1/2`.
pub fn better_prize_half(iv: &mut Interview<'_>, event: &Event, prizes: Prizes) -> Result<bool> {
    event.check(iv.n_atoms())?;
    let left = bet(iv, event, prizes);
    let right = bet(iv, &event.complement(iv.n_atoms()), prizes);
    Ok(iv.ask(left, right)? == Preference::Indifferent)
}

/// Errors unless the events are pairwise disjoint and cover `n_atoms`.
pub fn check_partition(partition: &[Event], n_atoms: usize) -> Result<()> {
    if partition.is_empty() {
        return Err(Error::Validation("empty partition".into()));
    }
    let mut covered = Event::empty();
    for (i, e) in partition.iter().enumerate() {
        e.check(n_atoms)?;
        if !covered.is_disjoint(e) {
            return Err(Error::Validation(format!("partition cell {} overlaps an earlier cell", i + 1)));
        }
        covered = covered.union(e);
    }
    if covered.len() != n_atoms {
        return Err(Error::Validation(format!("partition covers {} of {n_atoms} atoms", covered.len())));
    }
    Ok(())
}

/// Compares `{best on E_1}` with `{best on E_i}` for each later cell and
/// stops at the first strict preference.
pub fn verify_fair_lottery(iv: &mut Interview<'_>, partition: &[Event], prizes: Prizes) -> Result<bool> {
    check_partition(partition, iv.n_atoms())?;
    let first = bet(iv, &partition[0], prizes);
    for e in &partition[1..] {
        let other = bet(iv, e, prizes);
        if iv.ask(first.clone(), other)? != Preference::Indifferent {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Union of the first `k` cells: "one of the first k tickets".
pub fn lottery_event(partition: &[Event], k: usize) -> Result<Event> {
    if k > partition.len() {
        return Err(Error::Validation(format!("k = {k} exceeds the {} lottery cells", partition.len())));
    }
    Ok(partition[..k].iter().fold(Event::empty(), |acc, e| acc.union(e)))
}

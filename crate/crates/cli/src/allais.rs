use anyhow::Result;

use reu_core::domain::{Agent, Branch, Event, Gamble, Outcome, ProbabilityModel, RiskFunction, UtilityFunction};
use reu_core::{compare, reu, Preference};

// Atoms with probability 1%, 89%, 10%; prizes in millions.
fn gambles() -> Result<[Gamble; 4]> {
    let g = |bs: &[(&[usize], f64)]| {
        Gamble::new(
            bs.iter()
                .map(|(ix, m)| Branch { event: Event::from_indices(ix.iter().copied()), outcome: Outcome::Money(*m) })
                .collect(),
            3,
        )
    };
    Ok([
        Gamble::constant(Outcome::Money(1.0), 3),
        g(&[(&[0], 0.0), (&[1], 1.0), (&[2], 5.0)])?,
        g(&[(&[0, 2], 1.0), (&[1], 0.0)])?,
        g(&[(&[2], 5.0), (&[0, 1], 0.0)])?,
    ])
}

fn symbol(p: Preference) -> &'static str {
    match p {
        Preference::PreferLeft => "≻",
        Preference::PreferRight => "≺",
        Preference::Indifferent => "~",
    }
}

pub fn demo() -> Result<()> {
    let p = ProbabilityModel::new(vec![0.01, 0.89, 0.10])?;
    let u = UtilityFunction::linear(0.0, 5.0)?;
    let [l1, l2, l3, l4] = gambles()?;
    println!("L1: $1M for sure");
    println!("L2: $0 with 1%, $1M with 89%, $5M with 10%");
    println!("L3: $1M with 11%, else $0");
    println!("L4: $5M with 10%, else $0");
    println!("utility linear in money\n");
    println!(
        "{:<14} {:>10} {:>10} {:>10} {:>10}   {:<9} {:<9} allais",
        "risk", "L1", "L2", "L3", "L4", "L1 vs L2", "L3 vs L4"
    );
    let risks =
        [RiskFunction::Identity, RiskFunction::power(2.0)?, RiskFunction::power(3.0)?, RiskFunction::prelec(0.65)?];
    for r in risks {
        let agent = Agent::new(p.clone(), u.clone(), r);
        let v: Vec<f64> = [&l1, &l2, &l3, &l4].iter().map(|g| reu(&agent, g)).collect::<Result<_, _>>()?;
        let a = compare(&agent, &l1, &l2, 0.0)?;
        let b = compare(&agent, &l3, &l4, 0.0)?;
        let allais = a == Preference::PreferLeft && b == Preference::PreferRight;
        println!(
            "{:<14} {:>10.6} {:>10.6} {:>10.6} {:>10.6}   L1 {} L2   L3 {} L4   {}",
            agent.r.name(),
            v[0],
            v[1],
            v[2],
            v[3],
            symbol(a),
            symbol(b),
            if allais { "yes" } else { "no" }
        );
    }

    let mut found = 0;
    for i in 1..1000 {
        let x = i as f64 / 1000.0;
        let agent = Agent::new(
            p.clone(),
            UtilityFunction::table(vec![(0.0, 0.0), (1.0, x), (5.0, 1.0)])?,
            RiskFunction::Identity,
        );
        if compare(&agent, &l1, &l2, 0.0)? == Preference::PreferLeft
            && compare(&agent, &l3, &l4, 0.0)? == Preference::PreferRight
        {
            found += 1;
        }
    }
    println!("\nexpected utility (identity risk) with u($0) = 0, u($5M) = 1 and u($1M) on a 0.001 grid:");
    println!("{found} of 999 utility assignments give the common pattern L1 ≻ L2 and L4 ≻ L3");
    Ok(())
}

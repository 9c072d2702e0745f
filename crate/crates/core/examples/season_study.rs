//! Season study on a league whose teams change conference. Without arguments
//! a synthetic league is generated; otherwise pass a games CSV
//! (`season,team_a,team_b`) and a conference CSV (`season,team,conference`).
//!
//! ```text
//! cargo run --release --example season_study -- [games.csv conferences.csv [train]]
//! ```

use gbter_anomaly::experiments::season::{run_season_study, season_config, synthetic_league, ConferenceTable};
use gbter_anomaly::graph::io::load_seasons_csv;

fn main() -> anyhow::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (seasons, table, train) = match args.as_slice() {
        [] => {
            let league = synthetic_league(3);
            (league.seasons, league.conferences, 8)
        }
        [games, conferences, rest @ ..] => {
            let train = rest.first().map(|s| s.parse()).transpose()?.unwrap_or(1);
            (load_seasons_csv(games)?, ConferenceTable::load_csv(conferences)?, train)
        }
        _ => anyhow::bail!("expected no arguments or GAMES CONFERENCES [TRAIN]"),
    };

    let study = run_season_study(&seasons, train, &season_config(), &table)?;
    println!("{:<7} {:>9} {:>4} {:>4} {:>4}  movers / flagged teams", "season", "graph p", "tp", "fp", "fn");
    for o in &study.outcomes {
        println!(
            "{:<7} {:>9.5} {:>4} {:>4} {:>4}  {:?} / {:?}",
            o.season,
            o.graph_pvalue,
            o.community_true_positives,
            o.community_false_positives,
            o.community_false_negatives,
            o.movers,
            o.flagged_teams
        );
    }
    println!(
        "least anomalous season: {:?}; community precision {:.3}, recall {:.3}",
        study.least_anomalous(),
        study.community_precision(),
        study.community_recall()
    );
    Ok(())
}

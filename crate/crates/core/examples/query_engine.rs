//! Conjunctive queries over the election database.

use prefdb::query::{
    classify_query, count_session, decompose_query, election_database, evaluate, most_probable_session,
    parse_query, SolverConfig, TopKStrategy, DEFAULT_GROUNDING_GUARD,
};

fn main() -> prefdb::Result<()> {
    let db = election_database();
    let config = SolverConfig::default();
    let queries = [
        "Q() <- P(_,_;c1;c2), C(c1,'D',_,_,e,_), C(c2,'R',_,_,e,_)",
        "Q() <- P(_,_;c1;c2), C(c1,_,'F',_,_,_), C(c2,_,'M',_,_,_)",
    ];
    for text in queries {
        let q = parse_query(text)?;
        println!("{q}");
        println!("  class {:?}", classify_query(&q)?);
        for part in decompose_query(&q, &db, DEFAULT_GROUNDING_GUARD)? {
            println!("  grounded: {part}");
        }
        let eval = evaluate(&q, &db, &config)?;
        for a in &eval.answers {
            println!("  {:<12} {:.6} via {}", a.session, a.probability, a.solver);
        }
        println!("  Pr(Q) = {:.6}, expected count {:.6}", eval.probability, count_session(&q, &db, &config)?);
        let top = most_probable_session(&q, &db, 1, TopKStrategy::OneEdge, &config)?;
        println!("  most probable session {} ({} exact calls)", top.answers[0].session, top.exact_calls);
    }
    Ok(())
}

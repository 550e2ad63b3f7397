use splr::{Certificate, Config, Solver, SatSolverIF, SolveIF, SolverError};
use std::env;

fn report_unsat() -> ! {
    println!("s UNSATISFIABLE");
    std::process::exit(20);
}

fn main() {
    let path = env::args().nth(1).expect("usage: satbridge FILE.cnf");
    let config = Config::from(path.as_str());
    let mut solver = match Solver::build(&config) {
        Ok(s) => s,
        Err(SolverError::EmptyClause) | Err(SolverError::Inconsistent) | Err(SolverError::RootLevelConflict(_)) => report_unsat(),
        Err(e) => { eprintln!("c build error: {:?}", e); std::process::exit(1); }
    };
    match solver.solve() {
        Ok(Certificate::SAT(model)) => {
            println!("s SATISFIABLE");
            let mut line = String::from("v");
            for lit in model { line.push(' '); line.push_str(&lit.to_string()); }
            line.push_str(" 0");
            println!("{}", line);
            std::process::exit(10);
        }
        Ok(Certificate::UNSAT) => report_unsat(),
        Err(SolverError::EmptyClause) | Err(SolverError::Inconsistent) | Err(SolverError::RootLevelConflict(_)) => report_unsat(),
        Err(e) => { eprintln!("c error: {:?}", e); std::process::exit(1); }
    }
}

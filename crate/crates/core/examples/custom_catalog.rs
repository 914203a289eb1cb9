//! Evaluates a network described in catalog text, as passed to `--file`.

use psumbw::catalog::parse_network;
use psumbw::report::{cmd_compare, cmd_min_bw, render_markdown, EvalOptions};
use psumbw::{ControllerMode, GroupMode};

const CATALOG: &str = "\
# name,wi,hi,k,stride,pad,cin,cout,groups
stem,96,96,3,2,1,3,32,1
dw1,48,48,3,1,1,32,32,32
pw1,48,48,1,1,0,32,64,1
dw2,48,48,3,2,1,64,64,64
pw2,24,24,1,1,0,64,128,1
head,24,24,3,1,1,128,128,1
";

fn main() -> psumbw::Result<()> {
    let net = parse_network("tiny-mobile", CATALOG)?;
    print!("{}", render_markdown(&cmd_min_bw(std::slice::from_ref(&net))?));

    for groups in [GroupMode::Grouped, GroupMode::Dense] {
        println!("\ngroups charged as {groups}:");
        let options = EvalOptions { groups, ..EvalOptions::default() };
        let rows = cmd_compare(std::slice::from_ref(&net), &[288, 2304], ControllerMode::Passive, options)?;
        print!("{}", render_markdown(&rows));
    }

    match parse_network("broken", "conv,8,8,3,1,1,x,4") {
        Err(e) => println!("\nrejected malformed record: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}

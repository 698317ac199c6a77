//! Drives the library through configuration documents, as the command-line
//! tool does: generate a graph, compute its resistances from the exported
//! file, and run a seeded experiment twice to compare manifests.

use resistwalk::cli_io::{parse_config, run_command_in};

fn main() -> resistwalk::Result<()> {
    let root = std::env::temp_dir().join(format!("resistwalk-pipeline-{}", std::process::id()));

    let gen = parse_config("schema_version = 1\ncommand = \"gen\"\n[graph]\nfamily = \"gasket\"\nlevel = 2\n")?;
    run_command_in(&gen, &root.join("gen"))?;

    let graph = root.join("gen").join("graph.json");
    let resist = parse_config(&format!(
        "schema_version = 1\ncommand = \"resist\"\n[graph]\ninput = {:?}\n",
        graph.display().to_string()
    ))?;
    let m = run_command_in(&resist, &root.join("resist"))?;
    println!("resist outputs: {:?}", m.outputs.keys().collect::<Vec<_>>());

    let exp = parse_config(
        "schema_version = 1\ncommand = \"exp\"\nseed = 42\n\
         [experiment]\nkind = \"thm-a\"\nlevels = [1, 2]\nn_trials = 200\n",
    )?;
    let a = run_command_in(&exp, &root.join("exp-a"))?;
    let b = run_command_in(&exp, &root.join("exp-b"))?;
    for (name, sum) in &a.outputs {
        println!("{name}: {}", &sum[..16]);
    }
    println!("rerun identical: {}", a.same_run(&b));
    std::fs::remove_dir_all(&root).ok();
    Ok(())
}

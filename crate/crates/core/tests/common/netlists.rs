//! Random combinational netlists in the text format.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use s3dc::{parse_netlist, Netlist};

const KINDS: [(&str, usize); 6] = [("INV", 1), ("NAND2", 2), ("NAND3", 3), ("NAND4", 4), ("NOR2", 2), ("NOR3", 3)];
const PINS: [&str; 4] = ["A", "B", "C", "D"];

/// A random DAG of `gates` cells over `inputs` primary inputs. Every gate
/// output that nothing reads becomes a primary output.
pub fn random_netlist(rng: &mut ChaCha8Rng, gates: usize, inputs: usize) -> Netlist {
    let mut signals: Vec<String> = (0..inputs).map(|i| format!("i{i}")).collect();
    let mut read = vec![false; inputs + gates];
    let mut lines = Vec::new();
    for g in 0..gates {
        let (kind, fan_in) = KINDS[rng.gen_range(0..KINDS.len())];
        let mut pool: Vec<usize> = (0..signals.len()).collect();
        pool.shuffle(rng);
        // favor recent signals so the graph has depth
        pool.sort_by_cached_key(|&s| std::cmp::Reverse(s / 3 + rng.gen_range(0..2)));
        let mut pins = Vec::new();
        for (k, pin) in PINS.iter().take(fan_in).enumerate() {
            let s = pool[k % pool.len()];
            read[s] = true;
            pins.push(format!("{pin}={}", signals[s]));
        }
        let out = format!("w{g}");
        lines.push(format!(".gate {kind} {} Y={out}", pins.join(" ")));
        signals.push(out);
    }
    let outputs: Vec<&str> = (inputs..inputs + gates)
        .filter(|&s| !read[s])
        .map(|s| signals[s].as_str())
        .collect();
    let text = format!(
        ".model rand\n.inputs {}\n.outputs {}\n{}\n.end\n",
        signals[..inputs].join(" "),
        outputs.join(" "),
        lines.join("\n")
    );
    parse_netlist(&text).expect("generated netlists are valid")
}

//! Farfield partition of a row and the adaptive block mesh.

use volterra_h2::hierarchy::{admissible_blocks, coarsening_level, farfield_partition};

fn main() {
    let m = 27;
    let part = farfield_partition(m);
    println!("farfield of cell {m}:");
    for e in &part.entries {
        println!("  level {} interval {} cells {:?}", e.level, e.n, e.cells());
    }
    println!("coarsening level of row {m}: {}", coarsening_level(m));

    let n = 16;
    let blocks = admissible_blocks(n).unwrap();
    let mut grid = vec![vec!['.'; n]; n];
    for b in &blocks {
        let c = if b.near { '#' } else { char::from_digit(b.level as u32, 10).unwrap() };
        for i in b.rows.clone() {
            for j in b.cols.clone() {
                grid[i - 1][j - 1] = c;
            }
        }
    }
    for row in grid {
        println!("{}", row.into_iter().collect::<String>());
    }
}

//! Batch drivers behind the command-line subcommands.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use hdivflow_core::analysis::channel::channel_benchmark;
use hdivflow_core::analysis::study::{run_manufactured, run_test_one, test_one_mesh, MESH_FAMILY};
use hdivflow_core::analysis::{ChannelResult, ConvergenceTable, RunResult};
use hdivflow_core::VelocitySpace;
use log::info;

use crate::checkpoint::Checkpoint;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::mesh_io::read_mesh;
use crate::tables::{convergence_records, cutline_records, save_records, ConvergenceRecord};
use crate::vtk::save_vtk;

/// Apply `work` to every item on up to `jobs` threads. Results come back in
/// item order whatever the scheduling.
pub fn parallel_map<T, R, F>(items: &[T], jobs: usize, work: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let jobs = jobs.clamp(1, items.len().max(1));
    if jobs == 1 {
        return items.iter().map(&work).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = work(&items[i]);
                slots.lock().expect("result slots poisoned")[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .expect("result slots poisoned")
        .into_iter()
        .map(|r| r.expect("every item is processed"))
        .collect()
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn tag(nu: f64, r: f64) -> String {
    format!("nu{nu}_r{r}")
}

/// Every `(ν, r)` of the schedule on the first `meshes` meshes of the
/// family; writes `convergence.csv`.
pub fn convergence(config: &RunConfig) -> Result<Vec<ConvergenceTable>> {
    let schedule = config.schedule();
    let jobs: Vec<(usize, usize)> = (0..schedule.len())
        .flat_map(|k| (0..config.meshes).map(move |m| (k, m)))
        .collect();
    let results = parallel_map(&jobs, config.jobs, |&(k, m)| {
        let (nu, r) = schedule[k];
        let cells = MESH_FAMILY[m];
        info!("convergence: nu = {nu}, r = {r}, {cells} x {cells} cells");
        run_test_one(&config.study(nu, r), cells)
    });
    let mut runs = results.into_iter();
    let mut tables = Vec::with_capacity(schedule.len());
    for _ in &schedule {
        let group = runs
            .by_ref()
            .take(config.meshes)
            .collect::<std::result::Result<Vec<RunResult>, _>>()?;
        tables.push(ConvergenceTable::from_runs(&group));
    }
    ensure_dir(&config.out)?;
    save_records(&convergence_records(&tables), config.out.join("convergence.csv"))?;
    Ok(tables)
}

/// Channel runs for every `(ν, r)`; writes one VTK file and one cutline
/// CSV per station for each.
pub fn channel(config: &RunConfig) -> Result<Vec<(ChannelResult, Vec<PathBuf>)>> {
    let schedule = config.schedule();
    let results = parallel_map(&schedule, config.jobs, |&(nu, r)| {
        info!("channel: nu = {nu}, r = {r}");
        config.channel(nu, r).and_then(|c| Ok(channel_benchmark(&c)?))
    });
    ensure_dir(&config.out)?;
    let mut out = Vec::with_capacity(results.len());
    for (res, &(nu, r)) in results.into_iter().zip(&schedule) {
        let res = res?;
        let mut files = Vec::new();
        let space = VelocitySpace::new(&res.mesh)?;
        let vtk = config.out.join(format!("channel_{}.vtk", tag(nu, r)));
        save_vtk(&space, &res.velocity, &res.pressure, &format!("channel {}", tag(nu, r)), &vtk)?;
        files.push(vtk);
        for c in &res.cutlines {
            let path = config.out.join(format!("cutline_{}_x{}.csv", tag(nu, r), c.x));
            save_records(&cutline_records(c), &path)?;
            files.push(path);
        }
        out.push((res, files));
    }
    Ok(out)
}

/// Test 1 on a mesh file (or a family mesh) for every `(ν, r)`; writes a
/// checkpoint per time level, the final VTK state and the error row.
pub fn single(config: &RunConfig) -> Result<Vec<RunResult>> {
    let mesh = match &config.mesh {
        Some(path) => read_mesh(path)?,
        None => {
            let study = config.study(1.0, 2.0);
            test_one_mesh(MESH_FAMILY[config.meshes - 1], study.jitter, study.seed)?
        }
    };
    ensure_dir(&config.out)?;
    let schedule = config.schedule();
    let results = parallel_map(&schedule, config.jobs, |&(nu, r)| {
        info!("run: nu = {nu}, r = {r}, {} elements", mesh.num_elements());
        run_manufactured(&config.study(nu, r), &mesh)
    });
    let mut runs = Vec::with_capacity(results.len());
    let mut records = Vec::with_capacity(results.len());
    for (res, &(nu, r)) in results.into_iter().zip(&schedule) {
        let (run, traj) = res?;
        let dir = config.out.join(format!("run_{}", tag(nu, r)));
        ensure_dir(&dir)?;
        for (step, ((t, u), p)) in traj.times.iter().zip(&traj.velocities).zip(&traj.pressures).enumerate() {
            Checkpoint {
                step,
                time: *t,
                velocity: u.clone(),
                pressure: p.clone(),
            }
            .save(dir.join(format!("checkpoint_{step:05}.txt")))?;
        }
        let space = VelocitySpace::new(&mesh)?;
        save_vtk(
            &space,
            traj.last_velocity(),
            traj.last_pressure(),
            &format!("test 1 {}", tag(nu, r)),
            dir.join("final.vtk"),
        )?;
        records.push(ConvergenceRecord {
            nu,
            r,
            h: run.h_mean,
            dt: run.report.dt,
            vel_err: run.report.vel_err,
            pre_err: run.report.pre_err,
            order_vel: None,
            order_pre: None,
        });
        runs.push(run);
    }
    save_records(&records, config.out.join("run.csv"))?;
    Ok(runs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_map_keeps_order() {
        let items: Vec<u64> = (0..37).collect();
        let serial = parallel_map(&items, 1, |x| x * x);
        for jobs in [2, 4, 64] {
            assert_eq!(parallel_map(&items, jobs, |x| x * x), serial);
        }
        assert!(parallel_map(&[] as &[u64], 3, |x| *x).is_empty());
    }
}

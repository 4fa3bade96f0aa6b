//! Deterministic synthetic Git repositories for tests and demos.
//!
//! Commit times, authors, and messages are fixed, so commit hashes — and
//! every downstream artifact — are byte-identical across runs and machines.

use std::path::{Path, PathBuf};

use git2::{Repository, Signature, Time};

use crate::error::Error;
use crate::Result;

/// A throwaway repository the tests drive commit by commit.
pub struct FixtureRepo {
    pub path: PathBuf,
    repo: Repository,
    time: i64,
}

impl FixtureRepo {
    /// Initializes an empty repository with `master` checked out.
    pub fn init(path: &Path) -> Result<FixtureRepo> {
        std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))?;
        let repo = Repository::init(path)?;
        repo.set_head("refs/heads/master")?;
        Ok(FixtureRepo {
            path: path.to_path_buf(),
            repo,
            time: 1_600_000_000,
        })
    }

    /// Applies file changes (`Some` writes, `None` deletes) and commits them.
    /// Each commit advances the fixed clock by one hour.
    pub fn commit(&mut self, changes: &[(&str, Option<&str>)], message: &str) -> Result<String> {
        let workdir = self.repo.workdir().expect("fixture repos are non-bare");
        let mut index = self.repo.index()?;
        for (rel_path, content) in changes {
            let full = workdir.join(rel_path);
            match content {
                Some(text) => {
                    if let Some(parent) = full.parent() {
                        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
                    }
                    std::fs::write(&full, text).map_err(|e| Error::io(&full, e))?;
                    index.add_path(Path::new(rel_path))?;
                }
                None => {
                    let _ = std::fs::remove_file(&full);
                    index.remove_path(Path::new(rel_path))?;
                }
            }
        }
        index.write()?;
        let tree_id = index.write_tree()?;
        let tree = self.repo.find_tree(tree_id)?;
        self.time += 3600;
        let signature = Signature::new(
            "Fixture Author",
            "fixture@example.com",
            &Time::new(self.time, 0),
        )?;
        let head = self.repo.head().ok().and_then(|h| h.peel_to_commit().ok());
        let parents: Vec<&git2::Commit<'_>> = head.iter().collect();
        let oid = self.repo.commit(
            Some("HEAD"),
            &signature,
            &signature,
            message,
            &tree,
            &parents,
        )?;
        Ok(oid.to_string())
    }

    /// Moves a file, keeping its content byte-identical, so git detects the
    /// rename.
    pub fn rename_file(&mut self, from: &str, to: &str, message: &str) -> Result<String> {
        let content = std::fs::read_to_string(self.path.join(from))
            .map_err(|e| Error::io(self.path.join(from), e))?;
        self.commit(&[(from, None), (to, Some(&content))], message)
    }
}

/// The filter showcase: one constructor, one abstract method, one overridden
/// method, one empty method, one recursive method, one ordinary method.
/// Exactly the last two survive the dataset filters.
pub const FILTERS_JAVA: &str = r#"package demo;

public abstract class Filters {
    private int total;

    public Filters(int total) {
        this.total = total;
    }

    public abstract int computeLimit();

    @Override
    public String toString() {
        return "Filters" + total;
    }

    public void resetCounters() {
    }

    public int countDown(int n) {
        // walk toward the base case
        if (n <= 0) {
            return total;
        }
        return countDown(n - 1);
    }

    public int addTotal(int extra) {
        int next = total + extra;
        return next;
    }
}
"#;

const UTIL_JAVA: &str = r#"package demo;

public class Util {
    public String readFile(String path) {
        String data = path + ".data";
        return data;
    }

    public void writeFile(String path, String data) {
        String combined = path + data;
        System.out.println(combined);
    }

    public int openStream(String source) {
        int handle = source.length();
        return handle;
    }

    public void closeStream(int handle) {
        int closed = handle - handle;
        System.out.println(closed);
    }
}
"#;

const UTIL_JAVA_V2: &str = r#"package demo;

public class Util {
    public String readFile(String path) {
        String data = path + ".data" + ".v2";
        return data;
    }

    public void writeFile(String path, String data) {
        String combined = path + data;
        System.out.println(combined);
    }

    public int openStream(String source) {
        int handle = source.length();
        return handle;
    }

    public void closeStream(int handle) {
        int closed = handle - handle;
        System.out.println(closed);
    }

    public void flushBuffer(String path, String data) {
        String combined = path + data;
        System.out.println(combined);
    }

    public int resetStream(String source) {
        int fresh = source.length() + 1;
        return fresh;
    }
}
"#;

const MAIN_JAVA: &str = r#"package demo;

public class Main {
    public static void main(String[] args) {
        int code = args.length;
        System.exit(code);
    }

    public void run() {
        long started = System.nanoTime();
        System.out.println(started);
    }

    public void stop() {
        long stopped = System.currentTimeMillis();
        System.out.println(stopped);
    }
}
"#;

/// `run` renamed to `launch`; bodies byte-identical.
const MAIN_JAVA_RENAMED: &str = r#"package demo;

public class Main {
    public static void main(String[] args) {
        int code = args.length;
        System.exit(code);
    }

    public void launch() {
        long started = System.nanoTime();
        System.out.println(started);
    }

    public void stop() {
        long stopped = System.currentTimeMillis();
        System.out.println(stopped);
    }
}
"#;

const PARSER_JAVA: &str = r#"package demo;

public class Parser {
    public String parseLine(String line) {
        String trimmed = line.trim();
        return trimmed;
    }

    public int parseAll(String[] lines) {
        int parsed = lines.length;
        return parsed;
    }

    public String skipWhitespace(String text) {
        String packed = text.replace(" ", "");
        return packed;
    }
}
"#;

/// Same methods, class renamed along with the file.
const SCANNER_JAVA: &str = r#"package demo;

public class Scanner {
    public String parseLine(String line) {
        String trimmed = line.trim();
        return trimmed;
    }

    public int parseAll(String[] lines) {
        int parsed = lines.length;
        return parsed;
    }

    public String skipWhitespace(String text) {
        String packed = text.replace(" ", "");
        return packed;
    }
}
"#;

const BROKEN_JAVA: &str = "%%% this is not parseable java at all %%%\n(((";

const EXTRA_JAVA: &str = r#"package demo;

public class Extra {
    public int mergeLists(int left, int right) {
        int merged = left + right;
        return merged;
    }

    public int mergeArrays(int[] left, int[] right) {
        int merged = left.length + right.length;
        return merged;
    }
}
"#;

/// `copyBack` has the same body as `Util.writeFile`, so it textually
/// duplicates a training method and gets removed by dedup.
const MORE_JAVA: &str = r#"package demo;

public class More {
    public void copyBack(String path, String data) {
        String combined = path + data;
        System.out.println(combined);
    }

    public int sortItems(int[] items) {
        int sorted = items.length * 2;
        return sorted;
    }
}
"#;

/// `alpha`: the kitchen-sink project. Renames, moves, an unparseable file,
/// the filter showcase, and one cross-partition duplicate.
///
/// 20 creation events; with `snapshot_ratio = 0.8` the snapshot is the
/// third commit, validation gets the fourth commit's events (one of which
/// dedup removes), and the fifth commit's two events form the test set.
pub fn build_alpha(path: &Path) -> Result<FixtureRepo> {
    let mut repo = FixtureRepo::init(path)?;
    repo.commit(
        &[
            ("Util.java", Some(UTIL_JAVA)),
            ("Main.java", Some(MAIN_JAVA)),
            ("Broken.java", Some(BROKEN_JAVA)),
        ],
        "initial import",
    )?; // 7 events
    repo.commit(&[("Filters.java", Some(FILTERS_JAVA))], "add filters")?; // 13
    repo.commit(&[("Parser.java", Some(PARSER_JAVA))], "add parser")?; // 16 -> snapshot
    repo.commit(&[("Util.java", Some(UTIL_JAVA_V2))], "extend util")?; // 18 (+1 modified)
    repo.commit(
        &[
            ("Main.java", Some(MAIN_JAVA_RENAMED)),
            ("Parser.java", None),
            ("Scanner.java", Some(SCANNER_JAVA)),
        ],
        "rename run to launch, move parser to scanner",
    )?; // still 18: renames only
    repo.commit(&[("More.java", Some(MORE_JAVA))], "add more helpers")?; // 20
    Ok(repo)
}

const CORE_JAVA: &str = r#"package beta;

public class Core {
    public int boot(int stage) {
        int next = stage + 1;
        return next;
    }

    public int shutdown(int stage) {
        int prev = stage - 1;
        return prev;
    }

    public String describe(int stage) {
        String label = "stage" + stage;
        return label;
    }

    public int restart(int stage) {
        int cycled = stage * 2;
        return cycled;
    }

    public String banner(String name) {
        String framed = "[" + name + "]";
        return framed;
    }
}
"#;

const AUX_JAVA: &str = r#"package beta;

public class Aux {
    public int pad(int width) {
        int padded = width + 4;
        return padded;
    }

    public int clip(int width) {
        int clipped = width - 4;
        return clipped;
    }

    public String tag(String name) {
        String tagged = name + "!";
        return tagged;
    }
}
"#;

/// `beta`: a project with an incomplete history — all code lands in the
/// initial commit, so there are no post-snapshot creations and the project
/// is rejected.
pub fn build_beta(path: &Path) -> Result<FixtureRepo> {
    let mut repo = FixtureRepo::init(path)?;
    repo.commit(
        &[("Core.java", Some(CORE_JAVA)), ("Aux.java", Some(AUX_JAVA))],
        "initial import",
    )?;
    repo.commit(&[("README.md", Some("beta project\n"))], "add readme")?;
    Ok(repo)
}

const STORE_JAVA: &str = r#"package gamma;

public class Store {
    public void run() {
        long mark = System.nanoTime();
        System.out.println(mark);
    }

    public void run(int passes) {
        long mark = System.nanoTime() + passes;
        System.out.println(mark);
    }

    public void run(int passes, int delay) {
        long mark = System.nanoTime() + passes + delay;
        System.out.println(mark);
    }

    public int fetchUsers(String userTable) {
        int userCount = userTable.length();
        int userIndex = userCount + 1;
        return userIndex;
    }

    public int fetchOrders(String orderTable) {
        int orderCount = orderTable.length();
        int orderIndex = orderCount + 2;
        return orderIndex;
    }

    public int fetchItems(String itemTable) {
        int itemCount = itemTable.length();
        int itemIndex = itemCount + 3;
        return itemIndex;
    }

    public int saveUsers(String userPayload) {
        int userBytes = userPayload.length();
        return userBytes;
    }

    public int saveOrders(String orderPayload) {
        int orderBytes = orderPayload.length();
        return orderBytes;
    }

    public int saveItems(String itemPayload) {
        int itemBytes = itemPayload.length();
        return itemBytes;
    }

    public int mapResults(String resultSheet) {
        int resultRows = resultSheet.length();
        int resultCols = resultRows * 3;
        return resultCols;
    }

    public int filterRows(String rowFilter) {
        int rowsKept = rowFilter.length();
        return rowsKept;
    }

    public int groupKeys(String keySpace) {
        int keyGroups = keySpace.length();
        return keyGroups;
    }
}
"#;

const LOADER_JAVA: &str = r#"package gamma;

public class Loader {
    public int loadConfig(String configPath) {
        int configBytes = configPath.length();
        return configBytes;
    }

    public int loadSchema(String schemaPath) {
        int schemaBytes = schemaPath.length();
        return schemaBytes;
    }

    public int applyPatch(String patchBody) {
        int patchLines = patchBody.length();
        return patchLines;
    }

    public int revertPatch(String patchBody) {
        int patchLines = patchBody.length() - 1;
        return patchLines;
    }
}
"#;

const GAMMA_EXTRA_JAVA: &str = r#"package gamma;

public class Extra {
    public int countRows(String rowSheet) {
        int rowTally = rowSheet.length();
        return rowTally;
    }

    public int trimValues(String valueList) {
        int valueSpan = valueList.length();
        return valueSpan;
    }
}
"#;

/// Test methods named after their nearest training neighbors: each body is
/// a near-copy (well above the 0.8 token overlap) of the namesake method in
/// `Store`, but textually distinct so deduplication keeps it.
const PROBE_JAVA: &str = r#"package gamma;

public class Probe {
    public int fetchUsers(String userTable) {
        int userCount = userTable.length();
        int userIndex = userCount + 1;
        int userBonus = userIndex;
        return userBonus;
    }

    public int mapResults(String resultSheet) {
        int resultRows = resultSheet.length();
        int resultCols = resultRows * 3;
        int resultSum = resultCols;
        return resultSum;
    }
}
"#;

/// `gamma`: designed so the nearest-neighbor baseline dominates the
/// most-frequent one. Training holds three methods named `run` (making
/// `[run]` the most frequent name) plus uniquely-named methods; every test
/// method shares its name and most of its tokens with one training method.
pub fn build_gamma(path: &Path) -> Result<FixtureRepo> {
    let mut repo = FixtureRepo::init(path)?;
    repo.commit(&[("Store.java", Some(STORE_JAVA))], "initial import")?; // 12 events
    repo.commit(&[("Loader.java", Some(LOADER_JAVA))], "add loader")?; // 16 -> snapshot
    repo.commit(&[("Extra.java", Some(GAMMA_EXTRA_JAVA))], "add extra")?; // 18 validation
    repo.commit(&[("Probe.java", Some(PROBE_JAVA))], "add probes")?; // 20 test
    Ok(repo)
}

/// The bundled three-project demo workspace: one repository per
/// subdirectory.
pub fn build_demo_workspace(root: &Path) -> Result<()> {
    build_alpha(&root.join("alpha"))?;
    build_beta(&root.join("beta"))?;
    build_gamma(&root.join("gamma"))?;
    Ok(())
}

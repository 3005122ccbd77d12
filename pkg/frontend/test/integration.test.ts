/**
 * End-to-end against the real gw-serve / gw-lsp binaries.
 *
 * Runs only when GW_E2E=1 (the Python package must be installed and the
 * gw-* entry points on PATH). Verifies the full loop: corpus -> n-gram
 * model -> service -> language server -> ghost text -> Tab accept ->
 * telemetry on disk.
 */

import { execFileSync, spawn, ChildProcess } from "child_process";
import { mkdtempSync, readFileSync, writeFileSync, mkdirSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { SuggestionController } from "../src/controller";
import { GwLspClient } from "../src/lspClient";
import { spawnServerTransport, ProcessTransport } from "../src/nodeTransport";
import { JsonRpcConnection } from "../src/protocol";
import { FakeEditor } from "./fakeEditor";

const enabled = process.env.GW_E2E === "1";
const suite = enabled ? describe : describe.skip;

const PORT = 38400 + Math.floor(Math.random() * 500);
const URI = "file:///w/e2e.py";

suite("real server loop", () => {
    let serveProcess: ChildProcess | undefined;
    let transport: ProcessTransport | undefined;
    let workDir: string;
    let telemetryPath: string;

    beforeAll(async () => {
        workDir = mkdtempSync(join(tmpdir(), "gw-e2e-"));
        const corpusDir = join(workDir, "corpus");
        mkdirSync(corpusDir);
        writeFileSync(join(corpusDir, "boiler.py"), "import numpy as np\n".repeat(50));
        const modelPath = join(workDir, "model.ngram");
        execFileSync("gw-train", ["--corpus", corpusDir, "--out", modelPath, "--languages", "py"]);

        serveProcess = spawn(
            "gw-serve",
            ["--bind", `127.0.0.1:${PORT}`, "--backend", "ngram", "--model-path", modelPath],
            { stdio: ["ignore", "inherit", "inherit"] },
        );
        const deadline = Date.now() + 10_000;
        for (;;) {
            try {
                const response = await fetch(`http://127.0.0.1:${PORT}/healthz`);
                if (response.ok) {
                    break;
                }
            } catch {
                // not up yet
            }
            if (Date.now() > deadline) {
                throw new Error("gw-serve did not come up");
            }
            await new Promise((resolve) => setTimeout(resolve, 100));
        }

        telemetryPath = join(workDir, "events.ndjson");
        transport = spawnServerTransport("gw-lsp", [
            "--service-url",
            `http://127.0.0.1:${PORT}`,
            "--telemetry-log",
            telemetryPath,
        ]);
    }, 30_000);

    afterAll(() => {
        transport?.dispose();
        serveProcess?.kill();
    });

    it("completes a boilerplate import line and records telemetry", async () => {
        const client = new GwLspClient(new JsonRpcConnection(transport!));
        await client.initialize();
        const editor = new FakeEditor("import numpy as np\nimport numpy ");
        const controller = new SuggestionController(client, editor);
        editor.onChange((anchor, text, version) => {
            client.didChange(URI, version, [{ range: { start: anchor, end: anchor }, text }]);
            controller.onTextChanged();
        });
        client.didOpen(URI, "python", editor.version, editor.text);

        await controller.requestCompletion(URI, editor.endPosition());
        expect(editor.ghost?.insertText).toBe("as np\n");

        expect(await controller.accept(URI)).toBe(true);
        expect(editor.insertions).toEqual(["as np\n"]);
        expect(editor.text.startsWith("import numpy as np\nimport numpy as np\n")).toBe(true);

        await client.shutdown();
        await new Promise((resolve) => setTimeout(resolve, 300));
        const log = readFileSync(telemetryPath, "utf-8").trim().split("\n").map((l) => JSON.parse(l));
        const kinds = log.map((event) => event.kind);
        expect(kinds).toContain("shown");
        expect(kinds).toContain("received");
        expect(kinds).toContain("accepted");
    }, 30_000);
});

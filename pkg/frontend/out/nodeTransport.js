"use strict";
/** Transport over a child process's stdio (the gw-lsp server). */
Object.defineProperty(exports, "__esModule", { value: true });
exports.spawnServerTransport = spawnServerTransport;
const child_process_1 = require("child_process");
function spawnServerTransport(command, args) {
    const child = (0, child_process_1.spawn)(command, args, { stdio: ["pipe", "pipe", "inherit"] });
    const dataListeners = [];
    const closeListeners = [];
    child.stdout.on("data", (chunk) => {
        for (const listener of dataListeners) {
            listener(chunk);
        }
    });
    child.on("exit", () => {
        for (const listener of closeListeners) {
            listener();
        }
    });
    return {
        process: child,
        write(data) {
            child.stdin.write(data);
        },
        onData(listener) {
            dataListeners.push(listener);
        },
        onClose(listener) {
            closeListeners.push(listener);
        },
        dispose() {
            child.kill();
        },
    };
}
//# sourceMappingURL=nodeTransport.js.map
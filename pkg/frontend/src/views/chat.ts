import type { ChatMessage } from "../store.js";

export interface ChatHandlers {
  onSubmit: (text: string) => void;
}

export function renderChat(container: HTMLElement, messages: ChatMessage[],
                           handlers: ChatHandlers): void {
  container.innerHTML = "";
  const log = document.createElement("div");
  log.className = "chat-log";
  for (const msg of messages) {
    const row = document.createElement("p");
    row.className = `chat-msg chat-${msg.role}`;
    row.textContent = msg.text;
    log.appendChild(row);
  }
  container.appendChild(log);

  const form = document.createElement("form");
  form.className = "chat-form";
  const input = document.createElement("input");
  input.name = "goal";
  input.placeholder = "state an analytical goal or a refinement";
  form.appendChild(input);
  const button = document.createElement("button");
  button.type = "submit";
  button.textContent = "send";
  form.appendChild(button);
  form.addEventListener("submit", (ev) => {
    ev.preventDefault();
    const text = input.value.trim();
    if (!text) {
      input.classList.add("invalid");  // client-side block on empty text
      return;
    }
    input.classList.remove("invalid");
    input.value = "";
    handlers.onSubmit(text);
  });
  container.appendChild(form);
  log.scrollTop = log.scrollHeight;
}

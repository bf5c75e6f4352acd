//! Capability cards, the registry and card files.
use xlayer::agents::{default_cards, load_cards, save_cards, Registry};
use xlayer::controller::{default_separation, detect_goal, default_intents, select_agents, separate_task};

fn main() -> xlayer::Result<()> {
    let levels: Vec<String> = ["360p", "480p", "640p", "720p", "1080p"].map(String::from).into();
    let bands: Vec<String> = ["n1", "n2", "n3", "n5", "n7"].map(String::from).into();
    let cards = default_cards(&levels, &bands);

    let path = std::env::temp_dir().join("xlayer-cards.json");
    save_cards(&cards, &path)?;
    let registry = Registry::from_cards(load_cards(&path)?)?;
    for card in registry.cards() {
        println!("{:<7} {:<12} loss {:?}, skills {:?}", card.id, card.layer, card.loss, card.skills);
    }

    // A second card with the same id is refused.
    let mut dup = Registry::from_cards(cards.clone())?;
    if let Err(e) = dup.register(cards[0].clone()) {
        println!("duplicate: {e}");
    }

    let goal = detect_goal("make video clearer", &default_intents()).expect("known prompt");
    let subtasks = separate_task(&goal, &default_separation(&levels, &bands))?;
    for entry in select_agents(&subtasks, &registry)?.entries {
        println!("{} -> {}", entry.subtask_id, entry.agent_id);
    }
    Ok(())
}
